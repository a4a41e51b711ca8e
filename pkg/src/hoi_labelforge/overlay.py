"""SVG overlay rendering: red human box, blue object box, green center line."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .boxes import BBox

HUMAN_COLOR = "red"
OBJECT_COLOR = "blue"
LINK_COLOR = "green"


@dataclass(frozen=True)
class OverlayEntry:
    human_box: BBox
    object_box: BBox
    action_names: tuple[str, ...]


def _clamp_box(box: BBox, width: float, height: float) -> tuple[float, float, float, float]:
    """Corner rect clipped to the image frame; degenerate clips keep 1px."""
    x0 = min(max(box.x0, 0.0), width)
    y0 = min(max(box.y0, 0.0), height)
    x1 = min(max(box.x1, 0.0), width)
    y1 = min(max(box.y1, 0.0), height)
    return x0, y0, max(x1 - x0, 1.0), max(y1 - y0, 1.0)


def _fmt(value: float) -> str:
    return f"{value:.2f}".rstrip("0").rstrip(".")


def render_overlay(width: float, height: float, entries: list[OverlayEntry]) -> str:
    """Deterministic SVG document for one image's labels or ground truth."""
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect class="frame" x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for entry in entries:
        hx, hy, hw, hh = _clamp_box(entry.human_box, width, height)
        ox, oy, ow, oh = _clamp_box(entry.object_box, width, height)
        parts.append(
            f'<rect class="human" x="{_fmt(hx)}" y="{_fmt(hy)}" width="{_fmt(hw)}" '
            f'height="{_fmt(hh)}" fill="none" stroke="{HUMAN_COLOR}" stroke-width="2"/>'
        )
        parts.append(
            f'<rect class="object" x="{_fmt(ox)}" y="{_fmt(oy)}" width="{_fmt(ow)}" '
            f'height="{_fmt(oh)}" fill="none" stroke="{OBJECT_COLOR}" stroke-width="2"/>'
        )
        parts.append(
            f'<line class="link" x1="{_fmt(entry.human_box.cx)}" y1="{_fmt(entry.human_box.cy)}" '
            f'x2="{_fmt(entry.object_box.cx)}" y2="{_fmt(entry.object_box.cy)}" '
            f'stroke="{LINK_COLOR}" stroke-width="2"/>'
        )
        text = escape(", ".join(entry.action_names))
        mid_x = (entry.human_box.cx + entry.object_box.cx) / 2.0
        mid_y = (entry.human_box.cy + entry.object_box.cy) / 2.0
        parts.append(
            f'<text class="action" x="{_fmt(mid_x)}" y="{_fmt(mid_y - 4)}" '
            f'fill="{LINK_COLOR}" font-size="12">{text}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
