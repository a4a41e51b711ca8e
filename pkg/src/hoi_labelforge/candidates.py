"""Per-image detection ingest, spatial denoising, and human-object pairing.

A pair's candidate region is the union box of its two members, which keeps
the spatial relation the interaction lives in; per-instance crops would
separate the actors.  Pixel work (cropping, mask application) happens in the
extractor; this module only emits crop specifications.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .boxes import BBox, iou, union_box
from .errors import InputError, ValidationError
from .knowledge import KnowledgeBase

DETECTIONS_VERSION = 1
CROP_SPEC_VERSION = 1

BACKGROUND_MODES = ("retain", "delete")

DEFAULT_SCORE_THRESHOLD = 0.5
DEFAULT_NMS_IOU = 0.7


@dataclass(frozen=True)
class Detection:
    det_id: int
    box: BBox
    category: int
    score: float
    mask_ref: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(
                f"detection {self.det_id} score {self.score} outside [0, 1]"
            )


@dataclass(frozen=True)
class CandidatePair:
    """One human-object pairing; `pair_id` is the row index into the
    candidate embedding matrix generated from the same crop specs."""

    pair_id: int
    human_det: int
    object_det: int
    object_category: int
    crop: BBox
    background_mode: str
    human_box: BBox
    object_box: BBox
    human_mask_ref: str | None = None
    object_mask_ref: str | None = None

    def __post_init__(self):
        if self.human_det == self.object_det:
            raise ValidationError(f"pair {self.pair_id} pairs detection {self.human_det} with itself")
        if self.background_mode not in BACKGROUND_MODES:
            raise ValidationError(f"unknown background_mode {self.background_mode!r}")


@dataclass(frozen=True)
class ImageDetections:
    image_id: str
    width: float
    height: float
    detections: tuple[Detection, ...]


def denoise(
    detections: list[Detection],
    score_threshold: float = DEFAULT_SCORE_THRESHOLD,
    nms_iou: float = DEFAULT_NMS_IOU,
) -> list[Detection]:
    """Score filter followed by greedy per-category non-maximum suppression.

    A detection is suppressed when a kept detection of the same category
    overlaps it with IoU >= `nms_iou`; higher score wins, ties go to the
    lower det_id.  Overlap-free detections never suppress one another, even
    at a threshold of zero.  Input order and det_ids are preserved.
    """
    if not 0.0 <= score_threshold <= 1.0:
        raise ValidationError(f"score_threshold {score_threshold} outside [0, 1]")
    if not 0.0 <= nms_iou <= 1.0:
        raise ValidationError(f"nms_iou {nms_iou} outside [0, 1]")

    scored = [d for d in detections if d.score >= score_threshold]
    kept_ids: set[int] = set()
    by_category: dict[int, list[Detection]] = {}
    for det in scored:
        by_category.setdefault(det.category, []).append(det)
    for members in by_category.values():
        members = sorted(members, key=lambda d: (-d.score, d.det_id))
        kept: list[Detection] = []
        for det in members:
            overlaps = (iou(det.box, other.box) for other in kept)
            if all(value < nms_iou or value == 0.0 for value in overlaps):
                kept.append(det)
        kept_ids.update(d.det_id for d in kept)
    return [d for d in scored if d.det_id in kept_ids]


def enumerate_pairs(
    detections: list[Detection],
    person_category: int,
    allow_person_objects: bool = False,
    background_mode: str = "delete",
) -> list[CandidatePair]:
    """All human-object pairings, ordered by (human det_id, object det_id).

    By default objects are the non-person detections, so the pair count is
    exactly N_h * N_o.  With `allow_person_objects` other persons become
    eligible objects too; a detection never pairs with itself.
    """
    if background_mode not in BACKGROUND_MODES:
        raise ValidationError(f"unknown background_mode {background_mode!r}")
    humans = sorted(
        (d for d in detections if d.category == person_category), key=lambda d: d.det_id
    )
    if allow_person_objects:
        objects = sorted(detections, key=lambda d: d.det_id)
    else:
        objects = sorted(
            (d for d in detections if d.category != person_category), key=lambda d: d.det_id
        )
    pairs: list[CandidatePair] = []
    for human in humans:
        for obj in objects:
            if obj.det_id == human.det_id:
                continue
            pairs.append(
                CandidatePair(
                    pair_id=len(pairs),
                    human_det=human.det_id,
                    object_det=obj.det_id,
                    object_category=obj.category,
                    crop=union_box(human.box, obj.box),
                    background_mode=background_mode,
                    human_box=human.box,
                    object_box=obj.box,
                    human_mask_ref=human.mask_ref,
                    object_mask_ref=obj.mask_ref,
                )
            )
    return pairs


def crop_spec_document(pairs: list[CandidatePair], image_id: str) -> dict:
    """Serializable crop-spec document, records ordered by pair_id."""
    records = []
    for pair in sorted(pairs, key=lambda p: p.pair_id):
        records.append(
            {
                "pair_id": pair.pair_id,
                "image_id": image_id,
                "human_det": pair.human_det,
                "object_det": pair.object_det,
                "object_category": pair.object_category,
                "crop": pair.crop.to_dict(),
                "human_box": pair.human_box.to_dict(),
                "object_box": pair.object_box.to_dict(),
                "human_mask_ref": pair.human_mask_ref,
                "object_mask_ref": pair.object_mask_ref,
                "background_mode": pair.background_mode,
            }
        )
    return {"version": CROP_SPEC_VERSION, "image_id": image_id, "pairs": records}


def write_crop_specs(pairs: list[CandidatePair], image_id: str, path: str | Path) -> None:
    try:
        Path(path).write_text(
            json.dumps(crop_spec_document(pairs, image_id), indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise InputError(f"cannot write crop specs {path}: {exc}") from exc


def load_crop_specs(path: str | Path) -> tuple[str, list[CandidatePair]]:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read crop specs {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"crop specs {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("version") != CROP_SPEC_VERSION:
        raise ValidationError(f"{path}: unsupported crop-spec version {document.get('version')!r}")
    image_id = document.get("image_id")
    if not isinstance(image_id, str):
        raise ValidationError(f"{path}: missing image_id")
    pairs = []
    for index, record in enumerate(document.get("pairs", [])):
        try:
            pair = CandidatePair(
                pair_id=int(record["pair_id"]),
                human_det=int(record["human_det"]),
                object_det=int(record["object_det"]),
                object_category=int(record["object_category"]),
                crop=BBox.from_dict(record["crop"]),
                background_mode=record["background_mode"],
                human_box=BBox.from_dict(record["human_box"]),
                object_box=BBox.from_dict(record["object_box"]),
                human_mask_ref=record.get("human_mask_ref"),
                object_mask_ref=record.get("object_mask_ref"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: malformed pair record at index {index}: {exc}") from exc
        if pair.pair_id != index:
            raise ValidationError(
                f"{path}: pair_id {pair.pair_id} at index {index} breaks contiguous ordering"
            )
        pairs.append(pair)
    return image_id, pairs


def load_detections(path: str | Path, kb: KnowledgeBase | None = None) -> list[ImageDetections]:
    """Parse a detections file; with `kb` given, category ids are validated."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read detections {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"detections {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("version") != DETECTIONS_VERSION:
        raise ValidationError(f"{path}: unsupported detections version {document.get('version')!r}")
    images = []
    for image in document.get("images", []):
        image_id = image.get("image_id")
        if not isinstance(image_id, str):
            raise ValidationError(f"{path}: image entry without image_id")
        detections = []
        seen_ids: set[int] = set()
        for record in image.get("detections", []):
            try:
                det = Detection(
                    det_id=int(record["det_id"]),
                    box=BBox(
                        float(record["cx"]), float(record["cy"]),
                        float(record["w"]), float(record["h"]),
                    ),
                    category=int(record["category"]),
                    score=float(record["score"]),
                    mask_ref=record.get("mask_ref"),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(
                    f"{path}: image {image_id}: malformed detection record: {exc}"
                ) from exc
            if det.det_id in seen_ids:
                raise ValidationError(f"{path}: image {image_id}: duplicate det_id {det.det_id}")
            seen_ids.add(det.det_id)
            if kb is not None and not 0 <= det.category < kb.n_objects:
                raise ValidationError(
                    f"{path}: image {image_id}: detection {det.det_id} has "
                    f"unknown category {det.category}"
                )
            detections.append(det)
        images.append(
            ImageDetections(
                image_id=image_id,
                width=float(image.get("width", 0.0)),
                height=float(image.get("height", 0.0)),
                detections=tuple(detections),
            )
        )
    return images


def detections_document(images: list[ImageDetections]) -> dict:
    return {
        "version": DETECTIONS_VERSION,
        "images": [
            {
                "image_id": image.image_id,
                "width": image.width,
                "height": image.height,
                "detections": [
                    {
                        "det_id": d.det_id,
                        "cx": d.box.cx,
                        "cy": d.box.cy,
                        "w": d.box.w,
                        "h": d.box.h,
                        "category": d.category,
                        "score": d.score,
                        "mask_ref": d.mask_ref,
                    }
                    for d in image.detections
                ],
            }
            for image in images
        ],
    }


def write_detections(images: list[ImageDetections], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(detections_document(images), indent=2) + "\n", encoding="utf-8"
    )
