"""Command-line entry point wiring the pipeline stages and file formats.

Subcommands: emit-templates, pair, generate, evaluate, validate-kb, render.
Exit codes: 0 success, 2 missing/unreadable input, 3 validation failure,
4 alignment or binary-format mismatch.

Label generation is driven by a JSON manifest rather than a long flag list,
so reruns and ablation sweeps are version-controllable; every switchable
pipeline stage is a manifest field.  The HOI_LABELFORGE_THREADS environment
variable caps per-image worker threads (0 or unset picks a default).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .candidates import (
    denoise,
    enumerate_pairs,
    load_crop_specs,
    load_detections,
    write_crop_specs,
)
from .embeddings import (
    KIND_CANDIDATE,
    KIND_TEXT_T1,
    KIND_TEXT_T2,
    read_embeddings,
)
from .errors import AlignmentError, InputError, LabelForgeError, ValidationError
from .evaluation import evaluate, format_report, load_ground_truth, write_report
from .inference import (
    HoiLabel,
    InferenceConfig,
    infer_labels,
    load_labels,
    write_labels,
)
from .knowledge import KnowledgeBase, load_knowledge_base, render_templates
from .overlay import OverlayEntry, render_overlay
from .similarity import cosine_similarity, fuse

MANIFEST_VERSION = 1


def worker_count() -> int:
    """Thread cap from HOI_LABELFORGE_THREADS; 0 or unset means auto."""
    raw = os.environ.get("HOI_LABELFORGE_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"HOI_LABELFORGE_THREADS={raw!r} is not an integer") from None
    if value < 0:
        raise ValidationError(f"HOI_LABELFORGE_THREADS must be >= 0, got {value}")
    if value == 0:
        return min(8, os.cpu_count() or 1)
    return value


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    kb: Path
    crop_specs: tuple[Path, ...]
    candidate_embeddings: tuple[Path, ...]
    text_embeddings_t1: Path
    text_embeddings_t2: Path | None
    labels_out: Path
    config: InferenceConfig
    tool_version: str | None = None


def load_manifest(path: str | Path) -> RunManifest:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("version") != MANIFEST_VERSION:
        raise ValidationError(f"{path}: unsupported manifest version {document.get('version')!r}")

    base = path.parent

    def resolve(value, what: str, required: bool = True) -> Path | None:
        if value is None:
            if required:
                raise ValidationError(f"{path}: manifest is missing {what}")
            return None
        if not isinstance(value, str):
            raise ValidationError(f"{path}: {what} must be a path string")
        return base / value

    def resolve_list(value, what: str) -> tuple[Path, ...]:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ValidationError(f"{path}: {what} must be a list of path strings")
        return tuple(base / v for v in value)

    crop_specs = resolve_list(document.get("crop_specs"), "crop_specs")
    candidates = resolve_list(document.get("candidate_embeddings"), "candidate_embeddings")
    if len(crop_specs) != len(candidates):
        raise ValidationError(
            f"{path}: crop_specs lists {len(crop_specs)} files but "
            f"candidate_embeddings lists {len(candidates)}"
        )
    config_raw = document.get("config", {})
    if not isinstance(config_raw, dict):
        raise ValidationError(f"{path}: config must be an object")
    try:
        config = InferenceConfig(**config_raw)
    except TypeError as exc:
        raise ValidationError(f"{path}: bad config: {exc}") from exc

    manifest = RunManifest(
        kb=resolve(document.get("kb"), "kb"),
        crop_specs=crop_specs,
        candidate_embeddings=candidates,
        text_embeddings_t1=resolve(document.get("text_embeddings_t1"), "text_embeddings_t1"),
        text_embeddings_t2=resolve(
            document.get("text_embeddings_t2"), "text_embeddings_t2",
            required=config.use_t2,
        ),
        labels_out=resolve(document.get("labels_out"), "labels_out"),
        config=config,
        tool_version=document.get("tool_version"),
    )
    missing = [
        str(p)
        for p in [manifest.kb, manifest.text_embeddings_t1,
                  *(([manifest.text_embeddings_t2] if manifest.config.use_t2 else [])),
                  *manifest.crop_specs, *manifest.candidate_embeddings]
        if p is not None and not p.exists()
    ]
    if missing:
        raise InputError(f"{path}: referenced input missing: {missing[0]}")
    return manifest


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_validate_kb(args) -> int:
    kb = load_knowledge_base(args.kb)
    print(
        f"ok: {kb.n_actions} actions, {kb.n_objects} objects, "
        f"{kb.n_hoi_categories} interaction categories"
    )
    return 0


def cmd_emit_templates(args) -> int:
    kb = load_knowledge_base(args.kb)
    rows = render_templates(kb)
    with open(args.out, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")
    print(f"wrote {len(rows)} templates to {args.out}")
    return 0


def cmd_pair(args) -> int:
    kb = load_knowledge_base(args.kb)
    images = load_detections(args.detections, kb=kb)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    total = 0
    for image in images:
        kept = denoise(
            list(image.detections),
            score_threshold=args.score_threshold,
            nms_iou=args.nms_iou,
        )
        pairs = enumerate_pairs(
            kept,
            person_category=args.person_category,
            allow_person_objects=args.allow_person_objects,
            background_mode=args.background,
        )
        write_crop_specs(pairs, image.image_id, out_dir / f"{image.image_id}.pairs.json")
        print(f"{image.image_id}: {len(kept)} detections -> {len(pairs)} pairs")
        total += len(pairs)
    print(f"total: {total} pairs across {len(images)} images")
    return 0


def _generate_for_image(crop_path, embedding_path, t1, t2, kb, cfg):
    image_id, pairs = load_crop_specs(crop_path)
    candidates = read_embeddings(embedding_path, expected_kind=KIND_CANDIDATE)
    if candidates.rows != len(pairs):
        raise AlignmentError(
            f"{embedding_path}: {candidates.rows} embedding rows but "
            f"{crop_path} lists {len(pairs)} pairs"
        )
    sim = cosine_similarity(candidates, t1)
    if t2 is not None:
        sim = fuse(sim, cosine_similarity(candidates, t2))
    return len(pairs), infer_labels(sim, pairs, kb, cfg, image_id=image_id)


def cmd_generate(args) -> int:
    manifest = load_manifest(args.manifest)
    kb = load_knowledge_base(manifest.kb)
    cfg = manifest.config
    t1 = read_embeddings(manifest.text_embeddings_t1, expected_kind=KIND_TEXT_T1)
    if t1.rows != kb.n_hoi_categories:
        raise AlignmentError(
            f"{manifest.text_embeddings_t1}: {t1.rows} rows, "
            f"expected N_T = {kb.n_hoi_categories}"
        )
    t2 = None
    if cfg.use_t2:
        t2 = read_embeddings(manifest.text_embeddings_t2, expected_kind=KIND_TEXT_T2)
        if t2.rows != kb.n_hoi_categories:
            raise AlignmentError(
                f"{manifest.text_embeddings_t2}: {t2.rows} rows, "
                f"expected N_T = {kb.n_hoi_categories}"
            )

    jobs = list(zip(manifest.crop_specs, manifest.candidate_embeddings))
    labels: list[HoiLabel] = []
    pairs_in = 0
    if len(jobs) > 1 and worker_count() > 1:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            results = list(
                pool.map(
                    lambda job: _generate_for_image(job[0], job[1], t1, t2, kb, cfg), jobs
                )
            )
    else:
        results = [_generate_for_image(c, e, t1, t2, kb, cfg) for c, e in jobs]
    for n_pairs, image_labels in results:
        pairs_in += n_pairs
        labels.extend(image_labels)

    write_labels(labels, cfg, manifest.labels_out)
    fraction = (len(labels) / pairs_in) if pairs_in else 0.0
    print(
        f"{pairs_in} pairs in, {len(labels)} labels out "
        f"(interacting fraction {fraction:.3f}) -> {manifest.labels_out}"
    )
    return 0


def _display_names(kb: KnowledgeBase | None) -> dict[int, str]:
    if kb is None:
        return {}
    return {
        hoi.hoi_id: f"{kb.actions[hoi.action_id].gerund} {kb.objects[hoi.object_id].article_phrase}"
        for hoi in kb.hoi_categories
    }


def _image_dimensions(detections_path) -> dict[str, tuple[float, float]]:
    if detections_path is None:
        return {}
    return {
        image.image_id: (image.width, image.height)
        for image in load_detections(detections_path)
    }


def _render_images(
    entries_by_image: dict[str, list[OverlayEntry]],
    dims: dict[str, tuple[float, float]],
    out_dir: Path,
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for image_id, entries in sorted(entries_by_image.items()):
        if image_id in dims:
            width, height = dims[image_id]
        else:
            # No detections file given: size the canvas to the boxes.
            xs = [e.human_box.x1 for e in entries] + [e.object_box.x1 for e in entries]
            ys = [e.human_box.y1 for e in entries] + [e.object_box.y1 for e in entries]
            width = max(xs, default=100.0) * 1.05
            height = max(ys, default=100.0) * 1.05
        svg = render_overlay(width, height, entries)
        (out_dir / f"{image_id}.svg").write_text(svg, encoding="utf-8")


def _labels_to_overlay(labels: list[HoiLabel], names: dict[int, str]) -> dict[str, list[OverlayEntry]]:
    grouped: dict[str, list[OverlayEntry]] = {}
    for label in labels:
        grouped.setdefault(label.image_id, []).append(
            OverlayEntry(
                human_box=label.human_box,
                object_box=label.object_box,
                action_names=tuple(
                    names.get(a.hoi_id, f"hoi {a.hoi_id}") for a in label.actions
                ),
            )
        )
    return grouped


def cmd_evaluate(args) -> int:
    _, labels = load_labels(args.labels)
    ground_truth = load_ground_truth(args.gt)
    kb = load_knowledge_base(args.kb) if args.kb else None
    report = evaluate(labels, ground_truth, iou_threshold=args.iou)
    write_report(report, args.out)
    names = _display_names(kb)
    table = format_report(report, names=names)
    Path(f"{args.out}.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    if args.overlays:
        grouped = _labels_to_overlay(labels, names)
        _render_images(grouped, _image_dimensions(args.detections), Path(args.overlays))
        print(f"overlays written to {args.overlays}")
    print(f"report written to {args.out}")
    return 0


def cmd_render(args) -> int:
    kb = load_knowledge_base(args.kb) if args.kb else None
    names = _display_names(kb)
    if args.labels:
        _, labels = load_labels(args.labels)
        grouped = _labels_to_overlay(labels, names)
    else:
        grouped = {}
        for gt in load_ground_truth(args.gt):
            grouped.setdefault(gt.image_id, []).append(
                OverlayEntry(
                    human_box=gt.human_box,
                    object_box=gt.object_box,
                    action_names=(names.get(gt.hoi_id, f"hoi {gt.hoi_id}"),),
                )
            )
    _render_images(grouped, _image_dimensions(args.detections), Path(args.out_dir))
    print(f"{len(grouped)} overlay file(s) written to {args.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoi-labelforge",
        description="Generate and score pseudo labels for human-object interactions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-kb", help="validate a knowledge-base file")
    p.add_argument("--kb", required=True)
    p.set_defaults(func=cmd_validate_kb)

    p = sub.add_parser("emit-templates", help="write sentence templates as JSON lines")
    p.add_argument("--kb", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_templates)

    p = sub.add_parser("pair", help="denoise detections and emit crop specs per image")
    p.add_argument("--detections", required=True)
    p.add_argument("--kb", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--score-threshold", type=float, default=0.5)
    p.add_argument("--nms-iou", type=float, default=0.7)
    p.add_argument("--person-category", type=int, default=0)
    p.add_argument("--background", choices=["retain", "delete"], default="delete")
    p.add_argument("--allow-person-objects", action="store_true")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("generate", help="run similarity fusion and inference per manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score labels against ground truth")
    p.add_argument("--labels", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kb", default=None, help="adds category names to the text table")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--overlays", default=None, help="directory for per-image SVG overlays")
    p.add_argument("--detections", default=None, help="detections file providing image sizes")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="render SVG overlays for labels or ground truth")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--labels")
    group.add_argument("--gt")
    p.add_argument("--kb", default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--detections", default=None, help="detections file providing image sizes")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LabelForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
