"""Detection scoring against ground truth at the mask level.

IoU is computed on rasterized pixel sets (shared grid). Matching is the
standard greedy scheme: detections in descending confidence order (ties by
ascending id) each claim the unmatched same-category ground truth with the
highest IoU at or above the threshold. Average precision integrates the
precision-recall curve with 101-point interpolated precision; mAP50 is the
unweighted mean over categories that have at least one ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EvalError
from .geometry import coverage_runs
from .ingest import InstanceRecord, gcode_number

DEFAULT_IOU_THRESHOLD = 0.5
_RECALL_LEVELS = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class MatchPair:
    detection_id: int
    gt_id: int
    iou: float


@dataclass(frozen=True)
class MatchSet:
    pairs: tuple[MatchPair, ...]
    unmatched_detections: tuple[int, ...]
    unmatched_gts: tuple[int, ...]

    @property
    def tp(self) -> int:
        return len(self.pairs)

    @property
    def fp(self) -> int:
        return len(self.unmatched_detections)

    @property
    def fn(self) -> int:
        return len(self.unmatched_gts)


@dataclass(frozen=True)
class PrecisionRecall:
    precision: float
    recall: float
    precision_defined: bool  # False when TP+FP == 0 (value reported as 0)
    recall_defined: bool  # False when TP+FN == 0


@dataclass(frozen=True)
class PRPoint:
    recall: float
    precision: float


@dataclass(frozen=True)
class APResult:
    category: str
    ap: float
    tp: int
    fp: int
    fn: int


class _RunSet:
    """Pixel coverage of one polygon as per-row runs, for fast exact IoU."""

    def __init__(self, polygon) -> None:
        rows, starts, ends = coverage_runs(polygon)
        if rows.size == 0:
            raise EvalError("mask IoU undefined for an empty rasterization")
        self.count = int((ends - starts).sum())
        self.by_row: dict[int, list[tuple[int, int]]] = {}
        for row, start, end in zip(rows.tolist(), starts.tolist(), ends.tolist()):
            self.by_row.setdefault(row, []).append((start, end))

    def intersection(self, other: _RunSet) -> int:
        if len(self.by_row) > len(other.by_row):
            return other.intersection(self)
        total = 0
        for row, runs in self.by_row.items():
            other_runs = other.by_row.get(row)
            if not other_runs:
                continue
            for s1, e1 in runs:
                for s2, e2 in other_runs:
                    total += max(0, min(e1, e2) - max(s1, s2))
        return total


def mask_iou(polygon_a, polygon_b) -> float:
    """Intersection-over-union of the two polygons' rasterized pixel sets."""
    a = _RunSet(polygon_a)
    b = _RunSet(polygon_b)
    inter = a.intersection(b)
    union = a.count + b.count - inter
    return inter / union


def _ranked_indices(detections: Sequence[InstanceRecord]) -> list[int]:
    for det in detections:
        if det.confidence is None:
            raise EvalError(f"detection {det.id} has no confidence")
    return sorted(
        range(len(detections)),
        key=lambda i: (-detections[i].confidence, detections[i].id),
    )


class _IouTable:
    """Lazy pairwise IoU with run-set caching keyed by list position."""

    def __init__(self, dets: Sequence[InstanceRecord], gts: Sequence[InstanceRecord]) -> None:
        self._dets = dets
        self._gts = gts
        self._det_runs: dict[int, _RunSet] = {}
        self._gt_runs: dict[int, _RunSet] = {}
        self._cache: dict[tuple[int, int], float] = {}

    def _runs(self, store: dict[int, _RunSet], records, idx: int) -> _RunSet:
        if idx not in store:
            store[idx] = _RunSet(records[idx].polygon)
        return store[idx]

    def iou(self, det_idx: int, gt_idx: int) -> float:
        key = (det_idx, gt_idx)
        if key not in self._cache:
            det = self._dets[det_idx]
            gt = self._gts[gt_idx]
            if _bboxes_disjoint(det.polygon, gt.polygon):
                self._cache[key] = 0.0
            else:
                a = self._runs(self._det_runs, self._dets, det_idx)
                b = self._runs(self._gt_runs, self._gts, gt_idx)
                inter = a.intersection(b)
                self._cache[key] = inter / (a.count + b.count - inter)
        return self._cache[key]


def _bboxes_disjoint(poly_a, poly_b) -> bool:
    ax = [p[0] for p in poly_a]
    ay = [p[1] for p in poly_a]
    bx = [p[0] for p in poly_b]
    by = [p[1] for p in poly_b]
    return (
        max(ax) < min(bx) or max(bx) < min(ax) or max(ay) < min(by) or max(by) < min(ay)
    )


def match(
    detections: Sequence[InstanceRecord],
    ground_truth: Sequence[InstanceRecord],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    same_category: bool = True,
) -> MatchSet:
    """Greedy one-to-one matching of detections to ground truth."""
    table = _IouTable(detections, ground_truth)
    taken: set[int] = set()
    pairs: list[MatchPair] = []
    unmatched_dets: list[int] = []
    for det_idx in _ranked_indices(detections):
        det = detections[det_idx]
        best_iou = 0.0
        best_gt = -1
        for gt_idx, gt in enumerate(ground_truth):
            if gt_idx in taken:
                continue
            if same_category and gt.gcode != det.gcode:
                continue
            iou = table.iou(det_idx, gt_idx)
            if iou >= iou_threshold and (
                iou > best_iou or (iou == best_iou and best_gt >= 0 and gt.id < ground_truth[best_gt].id)
            ):
                best_iou = iou
                best_gt = gt_idx
        if best_gt >= 0:
            taken.add(best_gt)
            pairs.append(MatchPair(det.id, ground_truth[best_gt].id, best_iou))
        else:
            unmatched_dets.append(det.id)
    unmatched_gts = [gt.id for i, gt in enumerate(ground_truth) if i not in taken]
    return MatchSet(tuple(pairs), tuple(unmatched_dets), tuple(unmatched_gts))


def precision_recall(matches: MatchSet) -> PrecisionRecall:
    """Precision and recall with the zero-denominator-as-zero convention flagged."""
    tp, fp, fn = matches.tp, matches.fp, matches.fn
    p_def = tp + fp > 0
    r_def = tp + fn > 0
    return PrecisionRecall(
        precision=tp / (tp + fp) if p_def else 0.0,
        recall=tp / (tp + fn) if r_def else 0.0,
        precision_defined=p_def,
        recall_defined=r_def,
    )


def pr_curve(
    detections: Sequence[InstanceRecord],
    ground_truth: Sequence[InstanceRecord],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    same_category: bool = True,
) -> list[PRPoint]:
    """Cumulative (recall, precision) after each ranked detection."""
    if not ground_truth:
        raise EvalError("PR curve undefined without ground truth")
    table = _IouTable(detections, ground_truth)
    taken: set[int] = set()
    points: list[PRPoint] = []
    tp = 0
    for rank, det_idx in enumerate(_ranked_indices(detections), start=1):
        det = detections[det_idx]
        best_iou = 0.0
        best_gt = -1
        for gt_idx, gt in enumerate(ground_truth):
            if gt_idx in taken:
                continue
            if same_category and gt.gcode != det.gcode:
                continue
            iou = table.iou(det_idx, gt_idx)
            if iou >= iou_threshold and iou > best_iou:
                best_iou = iou
                best_gt = gt_idx
        if best_gt >= 0:
            taken.add(best_gt)
            tp += 1
        points.append(PRPoint(recall=tp / len(ground_truth), precision=tp / rank))
    return points


def average_precision(
    detections: Sequence[InstanceRecord],
    ground_truth: Sequence[InstanceRecord],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    category: str | None = None,
) -> APResult:
    """101-point interpolated AP over one detection/ground-truth pool.

    Interpolated precision at recall level r is the maximum precision
    attained at any recall >= r on the cumulative PR curve.
    """
    if not ground_truth:
        raise EvalError("average precision undefined without ground truth")
    if category is None:
        cats = {g.gcode for g in ground_truth}
        category = cats.pop() if len(cats) == 1 else "all"
    points = pr_curve(detections, ground_truth, iou_threshold, same_category=False)
    tp = round(points[-1].recall * len(ground_truth)) if points else 0
    if points:
        recalls = np.array([p.recall for p in points])
        precisions = np.array([p.precision for p in points])
        # suffix max: best precision at any recall >= each point's recall
        envelope = np.maximum.accumulate(precisions[::-1])[::-1]
        idx = np.searchsorted(recalls, _RECALL_LEVELS, side="left")
        interp = np.where(idx < len(points), envelope[np.minimum(idx, len(points) - 1)], 0.0)
        ap = float(interp.mean())
    else:
        ap = 0.0
    return APResult(
        category=category,
        ap=ap,
        tp=tp,
        fp=len(detections) - tp,
        fn=len(ground_truth) - tp,
    )


def per_category_ap(
    detections: Sequence[InstanceRecord],
    ground_truth: Sequence[InstanceRecord],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> list[APResult]:
    """AP per category, for every category with at least one ground truth."""
    categories = sorted({g.gcode for g in ground_truth}, key=gcode_number)
    if not categories:
        raise EvalError("no ground truth in any category")
    results = []
    for cat in categories:
        dets = [d for d in detections if d.gcode == cat]
        gts = [g for g in ground_truth if g.gcode == cat]
        results.append(average_precision(dets, gts, iou_threshold, category=cat))
    return results


def map50(results: Sequence[APResult]) -> float:
    """Unweighted mean AP across categories."""
    if not results:
        raise EvalError("mAP undefined without per-category results")
    return sum(r.ap for r in results) / len(results)
