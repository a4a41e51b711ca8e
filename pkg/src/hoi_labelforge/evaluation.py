"""Triplet matching and average-precision scoring for generated labels.

Protocol: predictions are flattened to one (human box, object box, category,
score) triplet per selected action and greedily matched in descending score
order.  A prediction is a true positive when an unmatched ground-truth
triplet of the same category in the same image overlaps it with IoU at or
above the threshold on BOTH boxes; each ground truth matches at most once.
AP uses continuous all-points interpolation, and the mean runs over the
categories that have at least one ground-truth instance.

Predictions for images absent from the ground-truth file are dropped with a
warning; ground-truth images without predictions stay and count as false
negatives (a labels file cannot distinguish "nothing found" from "never
processed", and dropping such images would quietly inflate recall).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .boxes import BBox, iou
from .errors import InputError, ValidationError
from .inference import HoiLabel

log = logging.getLogger(__name__)

GROUND_TRUTH_VERSION = 1

DEFAULT_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class GroundTruth:
    image_id: str
    human_box: BBox
    object_box: BBox
    hoi_id: int


@dataclass(frozen=True)
class Prediction:
    """One flattened prediction triplet in match order."""

    image_id: str
    pair_id: int
    hoi_id: int
    score: float
    human_box: BBox
    object_box: BBox
    is_tp: bool = False


@dataclass
class MatchOutcome:
    predictions: list[Prediction] = field(default_factory=list)
    gt_count: dict[int, int] = field(default_factory=dict)

    @property
    def tp(self) -> int:
        return sum(1 for p in self.predictions if p.is_tp)

    @property
    def fp(self) -> int:
        return sum(1 for p in self.predictions if not p.is_tp)

    @property
    def fn(self) -> int:
        return sum(self.gt_count.values()) - self.tp


@dataclass(frozen=True)
class CategoryReport:
    ap: float
    gt: int
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class EvalReport:
    mean_ap: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    iou_threshold: float
    per_category: dict[int, CategoryReport]


def match(
    labels: list[HoiLabel],
    ground_truth: list[GroundTruth],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> MatchOutcome:
    """Greedy score-ordered assignment of predictions to ground truth."""
    if not 0.0 < iou_threshold <= 1.0:
        raise ValidationError(f"iou_threshold {iou_threshold} outside (0, 1]")

    gt_images = {g.image_id for g in ground_truth}
    label_images = {label.image_id for label in labels}
    orphaned = sorted(label_images - gt_images)
    if orphaned:
        log.warning(
            "dropping predictions for %d image(s) absent from ground truth: %s",
            len(orphaned), ", ".join(orphaned),
        )

    flat: list[Prediction] = []
    for label in labels:
        if label.image_id not in gt_images:
            continue
        for action in label.actions:
            flat.append(
                Prediction(
                    image_id=label.image_id,
                    pair_id=label.pair_id,
                    hoi_id=action.hoi_id,
                    score=action.score,
                    human_box=label.human_box,
                    object_box=label.object_box,
                )
            )
    # Ties resolve on (image_id, pair_id, hoi_id) so matching is deterministic.
    flat.sort(key=lambda p: (-p.score, p.image_id, p.pair_id, p.hoi_id))

    by_key: dict[tuple[str, int], list[int]] = {}
    for index, gt in enumerate(ground_truth):
        by_key.setdefault((gt.image_id, gt.hoi_id), []).append(index)
    taken = [False] * len(ground_truth)

    matched: list[Prediction] = []
    for pred in flat:
        best_index = -1
        best_overlap = -1.0
        for gt_index in by_key.get((pred.image_id, pred.hoi_id), []):
            if taken[gt_index]:
                continue
            gt = ground_truth[gt_index]
            overlap_h = iou(pred.human_box, gt.human_box)
            overlap_o = iou(pred.object_box, gt.object_box)
            if overlap_h < iou_threshold or overlap_o < iou_threshold:
                continue
            overlap = min(overlap_h, overlap_o)
            if overlap > best_overlap:
                best_overlap = overlap
                best_index = gt_index
        if best_index >= 0:
            taken[best_index] = True
            matched.append(
                Prediction(
                    image_id=pred.image_id,
                    pair_id=pred.pair_id,
                    hoi_id=pred.hoi_id,
                    score=pred.score,
                    human_box=pred.human_box,
                    object_box=pred.object_box,
                    is_tp=True,
                )
            )
        else:
            matched.append(pred)

    gt_count: dict[int, int] = {}
    for gt in ground_truth:
        gt_count[gt.hoi_id] = gt_count.get(gt.hoi_id, 0) + 1
    return MatchOutcome(predictions=matched, gt_count=gt_count)


def _all_points_ap(tp_flags: list[bool], n_gt: int) -> float:
    """Continuous interpolated AP for one category's ranked predictions."""
    if n_gt == 0:
        return 0.0
    precisions = []
    recalls = []
    tp_seen = 0
    for rank, flag in enumerate(tp_flags, start=1):
        if flag:
            tp_seen += 1
        precisions.append(tp_seen / rank)
        recalls.append(tp_seen / n_gt)
    ap = 0.0
    previous_recall = 0.0
    for k in range(len(tp_flags)):
        recall = recalls[k]
        if recall > previous_recall:
            # precision envelope: best precision at recall >= this level
            best = max(precisions[k:])
            ap += (recall - previous_recall) * best
            previous_recall = recall
    return ap


def average_precision(outcome: MatchOutcome) -> EvalReport:
    """Per-category AP and the unweighted mean over categories with ground truth."""
    by_category: dict[int, list[Prediction]] = {}
    for pred in outcome.predictions:
        by_category.setdefault(pred.hoi_id, []).append(pred)

    per_category: dict[int, CategoryReport] = {}
    ap_values = []
    for hoi_id in sorted(set(outcome.gt_count) | set(by_category)):
        n_gt = outcome.gt_count.get(hoi_id, 0)
        preds = by_category.get(hoi_id, [])
        if n_gt == 0 and not preds:
            continue
        tp = sum(1 for p in preds if p.is_tp)
        fp = len(preds) - tp
        ap = _all_points_ap([p.is_tp for p in preds], n_gt)
        per_category[hoi_id] = CategoryReport(ap=ap, gt=n_gt, tp=tp, fp=fp, fn=n_gt - tp)
        if n_gt > 0:
            ap_values.append(ap)

    tp = outcome.tp
    fp = outcome.fp
    fn = outcome.fn
    total_predictions = tp + fp
    total_gt = tp + fn
    return EvalReport(
        mean_ap=sum(ap_values) / len(ap_values) if ap_values else 0.0,
        precision=tp / total_predictions if total_predictions else 0.0,
        recall=tp / total_gt if total_gt else 0.0,
        tp=tp,
        fp=fp,
        fn=fn,
        iou_threshold=0.0,  # caller fills via evaluate()
        per_category=per_category,
    )


def evaluate(
    labels: list[HoiLabel],
    ground_truth: list[GroundTruth],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> EvalReport:
    outcome = match(labels, ground_truth, iou_threshold)
    report = average_precision(outcome)
    return EvalReport(
        mean_ap=report.mean_ap,
        precision=report.precision,
        recall=report.recall,
        tp=report.tp,
        fp=report.fp,
        fn=report.fn,
        iou_threshold=iou_threshold,
        per_category=report.per_category,
    )


def report_document(report: EvalReport) -> dict:
    return {
        "version": 1,
        "iou_threshold": report.iou_threshold,
        "mean_ap": report.mean_ap,
        "precision": report.precision,
        "recall": report.recall,
        "counts": {"tp": report.tp, "fp": report.fp, "fn": report.fn},
        "per_category": {
            str(hoi_id): {
                "ap": c.ap, "gt": c.gt, "tp": c.tp, "fp": c.fp, "fn": c.fn,
            }
            for hoi_id, c in sorted(report.per_category.items())
        },
    }


def format_report(report: EvalReport, names: dict[int, str] | None = None) -> str:
    """Human-readable table; `names` optionally maps hoi_id to a display name."""
    lines = [
        f"mAP {report.mean_ap:.4f}  precision {report.precision:.4f}  "
        f"recall {report.recall:.4f}  (IoU >= {report.iou_threshold:g})",
        f"TP {report.tp}  FP {report.fp}  FN {report.fn}",
        "",
        f"{'hoi':>6}  {'AP':>7}  {'GT':>4}  {'TP':>4}  {'FP':>4}  {'FN':>4}  name",
    ]
    for hoi_id, c in sorted(report.per_category.items()):
        name = names.get(hoi_id, "") if names else ""
        lines.append(
            f"{hoi_id:>6}  {c.ap:>7.4f}  {c.gt:>4}  {c.tp:>4}  {c.fp:>4}  {c.fn:>4}  {name}"
        )
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_document(report), indent=2) + "\n", encoding="utf-8"
    )


def ground_truth_document(entries: list[GroundTruth]) -> dict:
    return {
        "version": GROUND_TRUTH_VERSION,
        "labels": [
            {
                "image_id": g.image_id,
                "human_box": g.human_box.to_dict(),
                "object_box": g.object_box.to_dict(),
                "actions": [{"hoi_id": g.hoi_id}],
            }
            for g in entries
        ],
    }


def write_ground_truth(entries: list[GroundTruth], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(ground_truth_document(entries), indent=2) + "\n", encoding="utf-8"
    )


def load_ground_truth(path: str | Path) -> list[GroundTruth]:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read ground truth {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"ground truth {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("version") != GROUND_TRUTH_VERSION:
        raise ValidationError(
            f"{path}: unsupported ground-truth version {document.get('version')!r}"
        )
    entries = []
    for index, record in enumerate(document.get("labels", [])):
        try:
            human_box = BBox.from_dict(record["human_box"])
            object_box = BBox.from_dict(record["object_box"])
            for action in record["actions"]:
                entries.append(
                    GroundTruth(
                        image_id=record["image_id"],
                        human_box=human_box,
                        object_box=object_box,
                        hoi_id=int(action["hoi_id"]),
                    )
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(
                f"{path}: malformed ground-truth record at index {index}: {exc}"
            ) from exc
    return entries
