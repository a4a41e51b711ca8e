"""Turns a fused similarity matrix into interaction labels.

Per candidate row the pipeline runs up to four steps:

1. affordance masking: zero every column whose interaction category does
   not belong to the pair's object category or whose action the object
   does not afford;
2. correlation amplification: find the top-scoring category, look up the
   categories correlated with it, and multiply that group by a factor > 1;
3. interaction decision: either the dynamic max-minus-mean criterion or a
   fixed threshold on the row maximum;
4. action selection: keep the single best category, or every category
   within a relative band below the maximum.

Masking and amplification are independently switchable and their order is
configurable; masking first is the default so the amplified top-1 is always
a plausible action for the object.

Two deliberate edge rules, both covered by tests: a row the mask zeroes
completely is non-interacting without consulting the threshold, and the
dynamic decision additionally requires a positive row maximum (a row whose
best similarity is not positive carries no interaction evidence, and the
raw criterion would otherwise fire on all-negative constant rows).

Default scale/omega values are working defaults, not tuned against any
benchmark; sweep them for serious use.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .boxes import BBox
from .candidates import CandidatePair
from .errors import AlignmentError, InputError, ValidationError
from .knowledge import KnowledgeBase, allowed_hoi_ids, lookup_correlated

LABELS_VERSION = 1

STAGE_ORDERS = ("pkm_then_icm", "icm_then_pkm")
SELECTIONS = ("top1", "adaption")


@dataclass(frozen=True)
class InferenceConfig:
    scale: float = 1.2
    omega1: float = 0.4
    omega2: float = 0.2
    stage_order: str = "pkm_then_icm"
    selection: str = "adaption"
    icm_enabled: bool = True
    pkm_enabled: bool = True
    dynamic_threshold_enabled: bool = True
    fixed_threshold: float = 0.0
    mean_over_allowed: bool = False
    use_t2: bool = True

    def __post_init__(self):
        if not self.scale > 1.0:
            raise ValidationError(f"scale must be > 1, got {self.scale}")
        if not 0.0 <= self.omega1 <= 1.0:
            raise ValidationError(f"omega1 {self.omega1} outside [0, 1]")
        if not 0.0 <= self.omega2 <= 1.0:
            raise ValidationError(f"omega2 {self.omega2} outside [0, 1]")
        if self.stage_order not in STAGE_ORDERS:
            raise ValidationError(f"unknown stage_order {self.stage_order!r}")
        if self.selection not in SELECTIONS:
            raise ValidationError(f"unknown selection {self.selection!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Stable 16-hex-digit hash identifying this configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class ThresholdResult(NamedTuple):
    theta: float
    interacting: bool


@dataclass(frozen=True)
class ActionScore:
    hoi_id: int
    score: float


@dataclass(frozen=True)
class HoiLabel:
    """One generated triplet record: boxes, object category, and the
    selected interaction categories with their post-pipeline scores."""

    image_id: str
    pair_id: int
    human_box: BBox
    object_box: BBox
    object_category: int
    actions: tuple[ActionScore, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.actions) == 0:
            raise ValidationError(f"label for pair {self.pair_id} has no actions")


def pkm_mask(row: Sequence[float] | np.ndarray, object_category: int, kb: KnowledgeBase) -> np.ndarray:
    """Zero every column the pair's object cannot realize.

    A column survives only when its category belongs to `object_category`
    and its action appears in the object's affordance set.
    """
    values = np.asarray(row, dtype=np.float64)
    if values.shape != (kb.n_hoi_categories,):
        raise AlignmentError(
            f"row has {values.shape} entries, expected ({kb.n_hoi_categories},)"
        )
    allowed = allowed_hoi_ids(kb, object_category)
    mask = np.zeros(kb.n_hoi_categories, dtype=np.float64)
    mask[list(allowed)] = 1.0
    return values * mask


def icm_amplify(row: Sequence[float] | np.ndarray, kb: KnowledgeBase, scale: float) -> np.ndarray:
    """Multiply the correlates of the top-scoring category by `scale`.

    The top-1 index is the lowest index among maximal entries.  A row with
    no positive entry carries no usable top-1 and is returned unchanged.
    """
    values = np.asarray(row, dtype=np.float64).copy()
    if values.size == 0 or float(values.max()) <= 0.0:
        return values
    k_max = int(np.argmax(values))
    correlated = lookup_correlated(kb, k_max)
    values[list(correlated)] *= scale
    return values


def dynamic_threshold(
    row: Sequence[float] | np.ndarray,
    omega1: float,
    allowed: Sequence[int] | None = None,
) -> ThresholdResult:
    """Max-minus-mean interaction criterion.

    theta = (max - mean) - max * omega1; the pair is interacting when theta
    is positive and the row maximum is positive.  The mean runs over all
    entries; pass `allowed` to average only those indices (useful when
    masking has zeroed most of the row, which deflates the plain mean).

    The sum uses exact rounding, so theta is invariant under any
    permutation of the row.
    """
    values = np.asarray(row, dtype=np.float64)
    if values.size == 0:
        raise ValidationError("dynamic threshold needs at least one entry")
    top = float(values.max())
    if allowed is not None:
        pool = values[list(allowed)]
        if pool.size == 0:
            raise ValidationError("allowed index set for the threshold mean is empty")
    else:
        pool = values
    mean = math.fsum(pool.tolist()) / pool.size
    theta = (top - mean) - top * omega1
    return ThresholdResult(theta=theta, interacting=theta > 0.0 and top > 0.0)


def action_filter(
    row: Sequence[float] | np.ndarray, omega2: float, selection: str
) -> list[int]:
    """Select categories for an interacting row.

    top1 keeps the single best index (lowest on ties).  adaption keeps
    every index inside the band (max - max*omega2, max]; the upper bound is
    inclusive and the argmax is always kept, so a degenerate band (omega2
    of zero, or a non-positive maximum) reduces to top-1.
    """
    if selection not in SELECTIONS:
        raise ValidationError(f"unknown selection {selection!r}")
    values = np.asarray(row, dtype=np.float64)
    if values.size == 0:
        raise ValidationError("action filter needs at least one entry")
    top = float(values.max())
    best = int(np.argmax(values))
    if selection == "top1":
        return [best]
    lower = top - top * omega2
    selected = {int(j) for j in np.flatnonzero((values > lower) & (values <= top))}
    selected.add(best)
    return sorted(selected)


def _pipeline_row(
    row: np.ndarray, object_category: int, kb: KnowledgeBase, cfg: InferenceConfig
) -> tuple[np.ndarray, Sequence[int] | None, bool]:
    """Run the enabled mask/amplify stages; returns (row, allowed, dead)."""
    allowed: Sequence[int] | None = None
    stages = ("pkm", "icm") if cfg.stage_order == "pkm_then_icm" else ("icm", "pkm")
    for stage in stages:
        if stage == "pkm" and cfg.pkm_enabled:
            row = pkm_mask(row, object_category, kb)
            allowed = allowed_hoi_ids(kb, object_category)
            if not np.any(row != 0.0):
                return row, allowed, True
        elif stage == "icm" and cfg.icm_enabled:
            row = icm_amplify(row, kb, cfg.scale)
    return row, allowed, False


def infer_labels(
    similarity: np.ndarray,
    pairs: list[CandidatePair],
    kb: KnowledgeBase,
    cfg: InferenceConfig,
    image_id: str = "",
) -> list[HoiLabel]:
    """Generate labels for every interacting candidate row, ordered by pair_id.

    Row i of `similarity` must belong to pairs[i]; non-interacting rows
    emit nothing.
    """
    matrix = np.asarray(similarity, dtype=np.float64)
    if matrix.ndim != 2:
        raise AlignmentError(f"similarity matrix must be 2-D, got shape {matrix.shape}")
    if matrix.shape[0] != len(pairs):
        raise AlignmentError(
            f"similarity has {matrix.shape[0]} rows but there are {len(pairs)} pairs"
        )
    if matrix.shape[1] != kb.n_hoi_categories:
        raise AlignmentError(
            f"similarity has {matrix.shape[1]} columns but the knowledge base "
            f"defines {kb.n_hoi_categories} interaction categories"
        )

    labels: list[HoiLabel] = []
    for pair, raw_row in zip(sorted(pairs, key=lambda p: p.pair_id), matrix):
        row, allowed, dead = _pipeline_row(raw_row, pair.object_category, kb, cfg)
        if dead:
            continue
        if cfg.dynamic_threshold_enabled:
            decision = dynamic_threshold(
                row, cfg.omega1, allowed=allowed if cfg.mean_over_allowed else None
            )
            interacting = decision.interacting
        else:
            interacting = float(row.max()) > cfg.fixed_threshold
        if not interacting:
            continue
        selected = action_filter(row, cfg.omega2, cfg.selection)
        labels.append(
            HoiLabel(
                image_id=image_id,
                pair_id=pair.pair_id,
                human_box=pair.human_box,
                object_box=pair.object_box,
                object_category=pair.object_category,
                actions=tuple(ActionScore(j, float(row[j])) for j in selected),
            )
        )
    return labels


def labels_document(labels: list[HoiLabel], cfg: InferenceConfig) -> dict:
    return {
        "version": LABELS_VERSION,
        "config_digest": cfg.digest(),
        "labels": [
            {
                "image_id": label.image_id,
                "pair_id": label.pair_id,
                "human_box": label.human_box.to_dict(),
                "object_box": label.object_box.to_dict(),
                "object_category": label.object_category,
                "actions": [{"hoi_id": a.hoi_id, "score": a.score} for a in label.actions],
            }
            for label in labels
        ],
    }


def write_labels(labels: list[HoiLabel], cfg: InferenceConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(labels_document(labels, cfg), indent=2) + "\n", encoding="utf-8"
    )


def load_labels(path: str | Path) -> tuple[str, list[HoiLabel]]:
    """Read a labels file; returns (config_digest, labels)."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read labels {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"labels {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("version") != LABELS_VERSION:
        raise ValidationError(f"{path}: unsupported labels version {document.get('version')!r}")
    labels = []
    for index, record in enumerate(document.get("labels", [])):
        try:
            labels.append(
                HoiLabel(
                    image_id=record["image_id"],
                    pair_id=int(record["pair_id"]),
                    human_box=BBox.from_dict(record["human_box"]),
                    object_box=BBox.from_dict(record["object_box"]),
                    object_category=int(record["object_category"]),
                    actions=tuple(
                        ActionScore(int(a["hoi_id"]), float(a["score"]))
                        for a in record["actions"]
                    ),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: malformed label record at index {index}: {exc}") from exc
    return document.get("config_digest", ""), labels
