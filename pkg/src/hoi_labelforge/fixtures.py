"""Deterministic synthetic fixtures: detections, embeddings, knowledge base,
ground truth, and a ready-to-run manifest, with no model anywhere.

The generator builds two candidate-row populations.  Planted pairs get the
target text vector plus bounded noise, so their row has one dominant
similarity; every other pair gets a near-uniform mixture of all text
vectors, whose flat similarity profile keeps the dynamic threshold silent.

Text embeddings are orthonormal: long-form templates occupy feature
dimensions [0, N_T) and short-form verb templates occupy [N_T, N_T + A),
so categories sharing a verb share a short-form row exactly.

Three optional shaping knobs exist for ablation studies: per-planted
emphasis on correlated categories, a uniform background level inside
planted rows, and foreign-category distractor components.  All randomness
comes from one seeded generator, so a (seed, spec) pair reproduces every
output file byte for byte.

Generated manifests enable the masked-mean threshold variant: affordance
masking zeroes most of a row, which deflates the plain row mean and would
otherwise declare near-uniform rows interacting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .boxes import BBox
from .candidates import (
    CandidatePair,
    Detection,
    ImageDetections,
    denoise,
    enumerate_pairs,
    write_crop_specs,
    write_detections,
)
from .embeddings import (
    KIND_CANDIDATE,
    KIND_TEXT_T1,
    KIND_TEXT_T2,
    EmbeddingMatrix,
    write_embeddings,
)
from .errors import ValidationError
from .evaluation import GroundTruth, write_ground_truth
from .inference import InferenceConfig
from .knowledge import (
    ActionEntry,
    HoiCategory,
    KnowledgeBase,
    ObjectEntry,
    build_knowledge_base,
    knowledge_base_document,
    lookup_correlated,
    save_knowledge_base,
)
from .similarity import cosine_similarity, fuse

PERSON_CATEGORY = 0


@dataclass(frozen=True)
class Planted:
    """One pair that genuinely interacts: global pair index, target
    category, and the similarity gap the row must keep over noise."""

    pair_index: int
    hoi_id: int
    margin: float


@dataclass(frozen=True)
class Distractor:
    """Contaminating component pushed into one pair's candidate vector."""

    pair_index: int
    hoi_id: int
    weight: float


@dataclass(frozen=True)
class FixtureSpec:
    seed: int
    n_humans: int
    n_objects: int
    n_hoi: int
    dim: int
    planted: tuple[Planted, ...] = ()
    noise: float = 0.05
    n_images: int = 1
    n_actions: int | None = None
    correlated_weight: float = 0.0
    background_level: float = 0.0
    distractors: tuple[Distractor, ...] = ()

    def __post_init__(self):
        if self.n_hoi < 1:
            raise ValidationError("fixture needs at least one interaction category")
        if self.dim < 2:
            raise ValidationError(f"feature dim must be >= 2, got {self.dim}")
        if self.noise < 0:
            raise ValidationError(f"noise amplitude must be >= 0, got {self.noise}")
        if self.n_images < 1:
            raise ValidationError("fixture needs at least one image")
        total_pairs = self.n_images * self.n_humans * self.n_objects
        for p in self.planted:
            if not 0 <= p.hoi_id < self.n_hoi:
                raise ValidationError(f"planted hoi_id {p.hoi_id} outside [0, {self.n_hoi})")
            if p.margin <= 0:
                raise ValidationError(f"planted margin must be > 0, got {p.margin}")
            if not 0 <= p.pair_index < total_pairs:
                raise ValidationError(
                    f"planted pair_index {p.pair_index} outside [0, {total_pairs})"
                )
        for d in self.distractors:
            if not 0 <= d.hoi_id < self.n_hoi:
                raise ValidationError(f"distractor hoi_id {d.hoi_id} outside [0, {self.n_hoi})")
            if not 0 <= d.pair_index < total_pairs:
                raise ValidationError(
                    f"distractor pair_index {d.pair_index} outside [0, {total_pairs})"
                )

    @property
    def actions_count(self) -> int:
        if self.n_actions is not None:
            return self.n_actions
        return max(2, math.ceil(math.sqrt(self.n_hoi)))


@dataclass
class FixtureBundle:
    spec: FixtureSpec
    kb: KnowledgeBase
    images: list[ImageDetections]
    pairs_by_image: dict[str, list[CandidatePair]]
    ground_truth: list[GroundTruth]
    config: InferenceConfig
    paths: dict[str, object] = field(default_factory=dict)


def _synthetic_kb(spec: FixtureSpec) -> KnowledgeBase:
    """Knowledge base with categories laid out in per-object blocks.

    Category k maps to action k % A and object 1 + k // A (object 0 is the
    person).  Correlation sets are the per-object blocks, self first, which
    gives every category a non-trivial correlate group; affordances allow
    exactly the actions appearing in each object's block.
    """
    n_actions = spec.actions_count
    n_object_cats = math.ceil(spec.n_hoi / n_actions)
    actions = [
        ActionEntry(a, f"action{a}", f"performing action {a}") for a in range(n_actions)
    ]
    objects = [ObjectEntry(0, "person", "a person")] + [
        ObjectEntry(o + 1, f"object{o + 1}", f"an object {o + 1}") for o in range(n_object_cats)
    ]
    hois = [
        HoiCategory(k, action_id=k % n_actions, object_id=1 + k // n_actions)
        for k in range(spec.n_hoi)
    ]
    blocks: dict[int, list[int]] = {}
    for hoi in hois:
        blocks.setdefault(hoi.object_id, []).append(hoi.hoi_id)
    correlation = {
        k: [k] + [m for m in blocks[hois[k].object_id] if m != k] for k in range(spec.n_hoi)
    }
    affordance = {0: list(range(n_actions))}
    for object_id, members in blocks.items():
        affordance[object_id] = sorted({hois[m].action_id for m in members})
    document = {
        "version": 1,
        "actions": [{"action_id": a.action_id, "name": a.name, "gerund": a.gerund}
                    for a in actions],
        "objects": [{"object_id": o.object_id, "name": o.name, "article_phrase": o.article_phrase}
                    for o in objects],
        "hoi_categories": [{"hoi_id": h.hoi_id, "action_id": h.action_id, "object_id": h.object_id}
                           for h in hois],
        "correlation": {str(k): v for k, v in correlation.items()},
        "affordance": {str(k): v for k, v in affordance.items()},
    }
    return build_knowledge_base(document)


def _detection_grid(
    spec: FixtureSpec, kb: KnowledgeBase, object_categories: dict[tuple[int, int], int]
) -> list[ImageDetections]:
    """Disjoint 40x40 boxes on two rows: humans on top, objects below."""
    images = []
    width = 60.0 * max(spec.n_humans, spec.n_objects, 1) + 20.0
    height = 220.0
    for image_index in range(spec.n_images):
        detections = []
        for h in range(spec.n_humans):
            detections.append(
                Detection(
                    det_id=h,
                    box=BBox(cx=40.0 + 60.0 * h, cy=50.0, w=40.0, h=40.0),
                    category=PERSON_CATEGORY,
                    score=0.95,
                )
            )
        for o in range(spec.n_objects):
            detections.append(
                Detection(
                    det_id=spec.n_humans + o,
                    box=BBox(cx=40.0 + 60.0 * o, cy=150.0, w=40.0, h=40.0),
                    category=object_categories[(image_index, o)],
                    score=0.9,
                )
            )
        images.append(
            ImageDetections(
                image_id=f"img{image_index:03d}",
                width=width,
                height=height,
                detections=tuple(detections),
            )
        )
    return images


def _assign_object_categories(spec: FixtureSpec, kb: KnowledgeBase) -> dict[tuple[int, int], int]:
    """Round-robin object categories, overridden by planted constraints."""
    n_cats = kb.n_objects - 1  # excluding person
    assignment = {
        (i, o): 1 + (o % n_cats) for i in range(spec.n_images) for o in range(spec.n_objects)
    }
    pairs_per_image = spec.n_humans * spec.n_objects
    pinned: dict[tuple[int, int], int] = {}
    for p in spec.planted:
        image_index = p.pair_index // pairs_per_image
        o_index = (p.pair_index % pairs_per_image) % spec.n_objects
        required = kb.hoi_categories[p.hoi_id].object_id
        key = (image_index, o_index)
        if key in pinned and pinned[key] != required:
            raise ValidationError(
                f"planted interactions disagree on the category of object slot {key}"
            )
        pinned[key] = required
        assignment[key] = required
    return assignment


def _text_embeddings(spec: FixtureSpec, kb: KnowledgeBase) -> tuple[EmbeddingMatrix, EmbeddingMatrix]:
    needed = spec.n_hoi + kb.n_actions
    if spec.dim < needed:
        raise ValidationError(
            f"feature dim {spec.dim} too small: orthonormal text embeddings "
            f"need at least n_hoi + n_actions = {needed}"
        )
    t1 = np.zeros((spec.n_hoi, spec.dim), dtype=np.float32)
    t2 = np.zeros((spec.n_hoi, spec.dim), dtype=np.float32)
    for hoi in kb.hoi_categories:
        t1[hoi.hoi_id, hoi.hoi_id] = 1.0
        t2[hoi.hoi_id, spec.n_hoi + hoi.action_id] = 1.0
    return (
        EmbeddingMatrix(data=t1, kind=KIND_TEXT_T1),
        EmbeddingMatrix(data=t2, kind=KIND_TEXT_T2),
    )


def _candidate_vectors(
    spec: FixtureSpec,
    kb: KnowledgeBase,
    t1: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    total_pairs = spec.n_images * spec.n_humans * spec.n_objects
    planted_by_pair = {p.pair_index: p for p in spec.planted}
    distractors_by_pair: dict[int, list[Distractor]] = {}
    for d in spec.distractors:
        distractors_by_pair.setdefault(d.pair_index, []).append(d)

    uniform = t1.sum(axis=0).astype(np.float64)
    uniform /= np.linalg.norm(uniform)

    vectors = np.zeros((total_pairs, spec.dim), dtype=np.float64)
    for index in range(total_pairs):
        planted = planted_by_pair.get(index)
        if planted is not None:
            base = t1[planted.hoi_id].astype(np.float64).copy()
            correlated = lookup_correlated(kb, planted.hoi_id)
            if spec.correlated_weight > 0.0:
                for k in correlated:
                    if k != planted.hoi_id:
                        base += spec.correlated_weight * t1[k]
            if spec.background_level > 0.0:
                for k in range(spec.n_hoi):
                    if k != planted.hoi_id and k not in correlated:
                        base += spec.background_level * t1[k]
        else:
            base = uniform.copy()
        for d in distractors_by_pair.get(index, []):
            base += d.weight * t1[d.hoi_id]
        base /= np.linalg.norm(base)
        if spec.noise > 0.0:
            base = base + rng.uniform(-spec.noise, spec.noise, size=spec.dim)
        vectors[index] = base
    return vectors


def _check_margins(
    spec: FixtureSpec,
    kb: KnowledgeBase,
    fused: np.ndarray,
) -> None:
    """Planted rows must separate the target from pure-noise columns."""
    distractor_hois: dict[int, set[int]] = {}
    for d in spec.distractors:
        distractor_hois.setdefault(d.pair_index, set()).add(d.hoi_id)
    for p in spec.planted:
        row = fused[p.pair_index]
        excluded = {p.hoi_id}
        if spec.correlated_weight > 0.0:
            excluded.update(lookup_correlated(kb, p.hoi_id))
        excluded.update(distractor_hois.get(p.pair_index, set()))
        competition = [row[j] for j in range(spec.n_hoi) if j not in excluded]
        if spec.background_level > 0.0 or not competition:
            continue  # background-raised columns are deliberate, not noise
        gap = float(row[p.hoi_id]) - max(competition)
        if gap < p.margin:
            raise ValidationError(
                f"planted pair {p.pair_index}: margin {p.margin} infeasible "
                f"against noise {spec.noise} (achieved gap {gap:.4f})"
            )


def default_fixture_config() -> InferenceConfig:
    return InferenceConfig(mean_over_allowed=True)


def synthesize(
    spec: FixtureSpec,
    out_dir: str | Path,
    config: InferenceConfig | None = None,
) -> FixtureBundle:
    """Generate every pipeline input file plus ground truth under `out_dir`.

    Layout: kb.json, detections.json, ground_truth.json, manifest.json,
    crop_specs/<image>.pairs.json, embeddings/*.faem.  The manifest is
    ready for label generation as written.
    """
    out_dir = Path(out_dir)
    (out_dir / "crop_specs").mkdir(parents=True, exist_ok=True)
    (out_dir / "embeddings").mkdir(parents=True, exist_ok=True)
    if config is None:
        config = default_fixture_config()

    rng = np.random.default_rng(spec.seed)
    kb = _synthetic_kb(spec)
    object_categories = _assign_object_categories(spec, kb)
    images = _detection_grid(spec, kb, object_categories)
    t1_matrix, t2_matrix = _text_embeddings(spec, kb)
    vectors = _candidate_vectors(spec, kb, t1_matrix.data, rng)

    pairs_per_image = spec.n_humans * spec.n_objects
    pairs_by_image: dict[str, list[CandidatePair]] = {}
    crop_spec_paths = []
    candidate_paths = []
    for image_index, image in enumerate(images):
        kept = denoise(list(image.detections))
        pairs = enumerate_pairs(kept, person_category=PERSON_CATEGORY)
        if len(pairs) != pairs_per_image:
            raise ValidationError(
                f"{image.image_id}: expected {pairs_per_image} pairs, got {len(pairs)}"
            )
        pairs_by_image[image.image_id] = pairs
        crop_path = out_dir / "crop_specs" / f"{image.image_id}.pairs.json"
        write_crop_specs(pairs, image.image_id, crop_path)
        crop_spec_paths.append(crop_path)

        start = image_index * pairs_per_image
        block = vectors[start:start + pairs_per_image]
        embedding = EmbeddingMatrix(data=block.astype(np.float32), kind=KIND_CANDIDATE)
        candidate_path = out_dir / "embeddings" / f"candidates_{image.image_id}.faem"
        write_embeddings(embedding, candidate_path)
        candidate_paths.append(candidate_path)

    # Margin feasibility is checked on the fused similarity the engine will see.
    all_candidates = EmbeddingMatrix(data=vectors.astype(np.float32), kind=KIND_CANDIDATE)
    fused = fuse(
        cosine_similarity(all_candidates, t1_matrix),
        cosine_similarity(all_candidates, t2_matrix),
    )
    _check_margins(spec, kb, np.asarray(fused, dtype=np.float64))

    ground_truth: list[GroundTruth] = []
    for p in sorted(spec.planted, key=lambda x: x.pair_index):
        image_index = p.pair_index // pairs_per_image
        local = p.pair_index % pairs_per_image
        pair = pairs_by_image[images[image_index].image_id][local]
        targets = [p.hoi_id]
        if spec.correlated_weight > 0.0:
            targets = list(lookup_correlated(kb, p.hoi_id))
        for hoi_id in targets:
            ground_truth.append(
                GroundTruth(
                    image_id=images[image_index].image_id,
                    human_box=pair.human_box,
                    object_box=pair.object_box,
                    hoi_id=hoi_id,
                )
            )

    kb_path = out_dir / "kb.json"
    detections_path = out_dir / "detections.json"
    gt_path = out_dir / "ground_truth.json"
    t1_path = out_dir / "embeddings" / "text_t1.faem"
    t2_path = out_dir / "embeddings" / "text_t2.faem"
    manifest_path = out_dir / "manifest.json"
    labels_path = out_dir / "labels.json"

    save_knowledge_base(kb, kb_path)
    write_detections(images, detections_path)
    write_ground_truth(ground_truth, gt_path)
    write_embeddings(t1_matrix, t1_path)
    write_embeddings(t2_matrix, t2_path)

    manifest = {
        "version": 1,
        "tool_version": __version__,
        "kb": "kb.json",
        "detections": "detections.json",
        "ground_truth": "ground_truth.json",
        "crop_specs": [f"crop_specs/{p.name}" for p in crop_spec_paths],
        "candidate_embeddings": [f"embeddings/{p.name}" for p in candidate_paths],
        "text_embeddings_t1": "embeddings/text_t1.faem",
        "text_embeddings_t2": "embeddings/text_t2.faem",
        "labels_out": "labels.json",
        "config": config.to_dict(),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    return FixtureBundle(
        spec=spec,
        kb=kb,
        images=images,
        pairs_by_image=pairs_by_image,
        ground_truth=ground_truth,
        config=config,
        paths={
            "kb": kb_path,
            "detections": detections_path,
            "ground_truth": gt_path,
            "crop_specs": crop_spec_paths,
            "candidate_embeddings": candidate_paths,
            "text_t1": t1_path,
            "text_t2": t2_path,
            "manifest": manifest_path,
            "labels_out": labels_path,
        },
    )


def demo_spec(seed: int = 20260809) -> FixtureSpec:
    """Small two-image fixture with three planted interactions."""
    return FixtureSpec(
        seed=seed,
        n_images=2,
        n_humans=2,
        n_objects=3,
        n_hoi=12,
        dim=32,
        planted=(
            Planted(pair_index=1, hoi_id=1, margin=0.3),
            Planted(pair_index=5, hoi_id=6, margin=0.3),
            Planted(pair_index=8, hoi_id=9, margin=0.3),
        ),
        noise=0.05,
    )


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="python -m hoi_labelforge.fixtures",
        description="Write the demo synthetic fixture (inputs + manifest) to a directory.",
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--noise", type=float, default=0.05)
    args = parser.parse_args(argv)
    spec = replace(demo_spec(seed=args.seed), noise=args.noise)
    bundle = synthesize(spec, args.out)
    print(f"fixture written to {args.out} ({len(bundle.ground_truth)} ground-truth triplets)")
    print(f"next: hoi-labelforge generate --manifest {bundle.paths['manifest']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
