"""Center-format bounding boxes and the overlap geometry used everywhere else."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box given as (center x, center y, width, height) in pixels."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"box field {name} is not a finite number: {value!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box sides must be positive, got w={self.w}, h={self.h}")

    @property
    def x0(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def x1(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def y0(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def y1(self) -> float:
        return self.cy + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def contains(self, other: "BBox", tol: float = 1e-6) -> bool:
        """True when `other` lies inside this box; `tol` absorbs the
        rounding the center-format representation introduces at borders."""
        return (
            self.x0 <= other.x0 + tol
            and self.y0 <= other.y0 + tol
            and self.x1 >= other.x1 - tol
            and self.y1 >= other.y1 - tol
        )

    def to_dict(self) -> dict:
        return {"cx": self.cx, "cy": self.cy, "w": self.w, "h": self.h}

    @classmethod
    def from_dict(cls, obj: dict) -> "BBox":
        try:
            return cls(float(obj["cx"]), float(obj["cy"]), float(obj["w"]), float(obj["h"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed box object: {obj!r}") from exc


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0.0 when they do not overlap."""
    ix = min(a.x1, b.x1) - max(a.x0, b.x0)
    iy = min(a.y1, b.y1) - max(a.y0, b.y0)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def union_box(a: BBox, b: BBox) -> BBox:
    """Smallest box containing both inputs."""
    x0 = min(a.x0, b.x0)
    y0 = min(a.y0, b.y0)
    x1 = max(a.x1, b.x1)
    y1 = max(a.y1, b.y1)
    return BBox(cx=(x0 + x1) / 2.0, cy=(y0 + y1) / 2.0, w=x1 - x0, h=y1 - y0)
