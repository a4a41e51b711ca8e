"""Independent brute-force reference implementations used only by tests.

Everything here is written as literal per-element loops over plain Python
lists and dicts, deliberately sharing no code path with the package: these
functions are the second route in every dual-route check, so they must stay
independent of the implementation they verify.
"""

from __future__ import annotations

import math


def cosine_oracle(images: list[list[float]], texts: list[list[float]]) -> list[list[float]]:
    """Double-loop cosine similarity in float64."""
    out = []
    for img in images:
        row = []
        for txt in texts:
            dot = 0.0
            n_img = 0.0
            n_txt = 0.0
            for a, b in zip(img, txt):
                dot += a * b
                n_img += a * a
                n_txt += b * b
            row.append(dot / (math.sqrt(n_img) * math.sqrt(n_txt)))
        out.append(row)
    return out


def fuse_oracle(sim1: list[list[float]], sim2: list[list[float]]) -> list[list[float]]:
    return [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(sim1, sim2)]


class OracleKb:
    """Plain-dict view of a knowledge base for the scalar pipeline."""

    def __init__(self, hoi_pairs: list[tuple[int, int]],
                 correlation: dict[int, list[int]],
                 affordance: dict[int, list[int]]):
        # hoi_pairs[j] = (action_id, object_id) of category j
        self.hoi_pairs = hoi_pairs
        self.correlation = correlation
        self.affordance = affordance

    @classmethod
    def from_kb(cls, kb) -> "OracleKb":
        return cls(
            hoi_pairs=[(h.action_id, h.object_id) for h in kb.hoi_categories],
            correlation={k: list(v) for k, v in kb.correlation.items()},
            affordance={k: list(v) for k, v in kb.affordance.items()},
        )

    def allowed(self, object_category: int) -> list[int]:
        result = []
        for j, (action_id, object_id) in enumerate(self.hoi_pairs):
            if object_id == object_category and action_id in self.affordance[object_category]:
                result.append(j)
        return result

    def correlated(self, hoi_id: int) -> list[int]:
        members = list(self.correlation.get(hoi_id, [hoi_id]))
        if hoi_id not in members:
            members.insert(0, hoi_id)
        return members


def oracle_mask(row: list[float], object_category: int, kb: OracleKb) -> list[float]:
    allowed = set(kb.allowed(object_category))
    return [value if j in allowed else 0.0 for j, value in enumerate(row)]


def oracle_argmax(row: list[float]) -> int:
    best = 0
    for j in range(1, len(row)):
        if row[j] > row[best]:
            best = j
    return best


def oracle_amplify(row: list[float], kb: OracleKb, scale: float) -> list[float]:
    top = max(row)
    if top <= 0.0:
        return list(row)
    k_max = oracle_argmax(row)
    members = set(kb.correlated(k_max))
    return [value * scale if j in members else value for j, value in enumerate(row)]


def oracle_theta(row: list[float], omega1: float, pool: list[float] | None = None) -> float:
    top = max(row)
    values = row if pool is None else pool
    mean = sum(values) / len(values)
    return (top - mean) - top * omega1


def oracle_filter(row: list[float], omega2: float, selection: str) -> list[int]:
    best = oracle_argmax(row)
    if selection == "top1":
        return [best]
    top = max(row)
    lower = top - top * omega2
    chosen = {j for j, value in enumerate(row) if lower < value <= top}
    chosen.add(best)
    return sorted(chosen)


def oracle_infer(
    rows: list[list[float]],
    object_categories: list[int],
    kb: OracleKb,
    cfg: dict,
) -> list[tuple[int, list[tuple[int, float]]]]:
    """Scalar re-evaluation of the whole label pipeline.

    `cfg` keys mirror the engine configuration: scale, omega1, omega2,
    stage_order, selection, icm_enabled, pkm_enabled,
    dynamic_threshold_enabled, fixed_threshold, mean_over_allowed.
    Returns (pair_index, [(hoi_id, score), ...]) per interacting row.
    """
    results = []
    stages = ["pkm", "icm"] if cfg["stage_order"] == "pkm_then_icm" else ["icm", "pkm"]
    for index, raw_row in enumerate(rows):
        row = [float(v) for v in raw_row]
        category = object_categories[index]
        allowed: list[int] | None = None
        dead = False
        for stage in stages:
            if stage == "pkm" and cfg["pkm_enabled"]:
                row = oracle_mask(row, category, kb)
                allowed = kb.allowed(category)
                if all(value == 0.0 for value in row):
                    dead = True
                    break
            elif stage == "icm" and cfg["icm_enabled"]:
                row = oracle_amplify(row, kb, cfg["scale"])
        if dead:
            continue
        if cfg["dynamic_threshold_enabled"]:
            pool = None
            if cfg["mean_over_allowed"] and allowed is not None:
                pool = [row[j] for j in allowed]
            theta = oracle_theta(row, cfg["omega1"], pool)
            interacting = theta > 0.0 and max(row) > 0.0
        else:
            interacting = max(row) > cfg["fixed_threshold"]
        if not interacting:
            continue
        selected = oracle_filter(row, cfg["omega2"], cfg["selection"])
        results.append((index, [(j, row[j]) for j in selected]))
    return results


def greedy_match_oracle(
    predictions: list[dict],
    ground_truth: list[dict],
    iou_threshold: float,
    iou_fn,
) -> list[bool]:
    """Tiny-case greedy matcher; predictions must already be score-sorted."""
    taken = [False] * len(ground_truth)
    flags = []
    for pred in predictions:
        hit = -1
        best = -1.0
        for g_index, gt in enumerate(ground_truth):
            if taken[g_index]:
                continue
            if gt["image_id"] != pred["image_id"] or gt["hoi_id"] != pred["hoi_id"]:
                continue
            ov_h = iou_fn(pred["human_box"], gt["human_box"])
            ov_o = iou_fn(pred["object_box"], gt["object_box"])
            if ov_h >= iou_threshold and ov_o >= iou_threshold:
                overlap = min(ov_h, ov_o)
                if overlap > best:
                    best = overlap
                    hit = g_index
        if hit >= 0:
            taken[hit] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags
