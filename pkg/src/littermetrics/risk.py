"""Alongshore sector partition and litter risk indices.

Sectors are equal-quantile slices of the instance alongshore coordinates
(linear-interpolation quantiles; outermost bounds at the min/max coordinate).
Per sector the clean-coast index is ``count / length`` and the ecological
risk index is ``sum_k weight_k * area_k`` over categories. Indices are
min-max normalized jointly across the survey's sectors. The count centroid
versus risk-weighted centroid distance quantifies where risk concentrates
away from mere abundance.

Instance inputs are ``(id, gcode, area_m2, x_m, y_m)`` tuples;
sums run in ascending-id order so results are independent of input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import RiskError
from .ingest import Taxonomy, gcode_number

# (instance id, gcode, area in m², centroid x in m, centroid y in m)
RiskItem = tuple[int, str, float, float, float]


@dataclass(frozen=True)
class Sector:
    index: int  # 1-based, ordered along the axis
    lower_m: float
    upper_m: float

    @property
    def length_m(self) -> float:
        return self.upper_m - self.lower_m


@dataclass(frozen=True)
class SectorMetrics:
    sector: Sector
    count: int
    cci: float
    eri: float
    cci_norm: float
    eri_norm: float


@dataclass(frozen=True)
class CentroidShift:
    c_count: tuple[float, float]
    c_eri: tuple[float, float]
    delta_m: float


def alongshore_coordinate(x_m: float, y_m: float, axis_angle_deg: float = 0.0) -> float:
    """Project a centroid onto the alongshore axis.

    The default axis (angle 0) is the y axis of the projected frame; the
    angle rotates the axis toward +x, so 90° measures along x instead.
    """
    theta = math.radians(axis_angle_deg)
    return x_m * math.sin(theta) + y_m * math.cos(theta)


def partition_sectors(coords: Sequence[float], k: int) -> list[Sector]:
    """Split the coordinate range into k equal-quantile sectors.

    Boundaries sit at the i/k linear-interpolation quantiles (i = 1..k-1);
    the outermost bounds are the min and max coordinate.
    """
    arr = np.asarray(coords, dtype=float)
    if k < 1:
        raise RiskError(f"sector count must be >= 1, got {k}")
    if arr.size < k:
        raise RiskError(f"cannot split {arr.size} instances into {k} sectors")
    if np.all(arr == arr[0]):
        raise RiskError("all alongshore coordinates are identical; sectors are undefined")
    inner = np.quantile(arr, np.arange(1, k) / k)  # linear interpolation
    bounds = np.concatenate(([arr.min()], inner, [arr.max()]))
    return [
        Sector(i + 1, float(bounds[i]), float(bounds[i + 1]))
        for i in range(k)
    ]


def assign_sectors(coords: Sequence[float], sectors: Sequence[Sector]) -> np.ndarray:
    """0-based sector index per coordinate; upper-bound-exclusive except the last."""
    arr = np.asarray(coords, dtype=float)
    lo = sectors[0].lower_m
    hi = sectors[-1].upper_m
    if ((arr < lo) | (arr > hi)).any():
        raise RiskError("coordinate outside the partition range")
    inner = np.array([s.upper_m for s in sectors[:-1]])
    return np.searchsorted(inner, arr, side="right")


def compute_cci(sector_instances: Sequence, sector: Sector) -> float:
    """Clean-coast index: instance count per meter of sector length."""
    if not sector.length_m > 0:
        raise RiskError(f"sector {sector.index} has zero length")
    return len(sector_instances) / sector.length_m


def compute_eri(sector_items: Iterable[RiskItem], taxonomy: Taxonomy) -> float:
    """Ecological risk index: hazard-weighted cumulative area of the sector.

    Per-category areas accumulate in ascending instance-id order, and the
    weighted category sums combine in ascending gcode order, so the result
    does not depend on input ordering.
    """
    per_category: dict[str, float] = {}
    for _, gcode, area, *_rest in sorted(sector_items, key=lambda it: it[0]):
        taxonomy.entry(gcode)  # raises for unknown categories, naming the gcode
        per_category[gcode] = per_category.get(gcode, 0.0) + area
    return float(
        sum(
            taxonomy.weight(gcode) * per_category[gcode]
            for gcode in sorted(per_category, key=gcode_number)
        )
    )


def minmax_normalize(values: Sequence[float]) -> list[float]:
    """Scale values to [0, 1]; a degenerate all-equal input maps to all 0.5."""
    if len(values) < 2:
        raise RiskError(f"min-max normalization needs >= 2 values, got {len(values)}")
    lo = min(values)
    hi = max(values)
    if hi == lo:
        return [0.5] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


def centroid_shift(items: Iterable[RiskItem], taxonomy: Taxonomy) -> CentroidShift:
    """Distance between the unweighted count centroid and the centroid
    weighted by area times hazard weight."""
    ordered = sorted(items, key=lambda it: it[0])
    if not ordered:
        raise RiskError("centroid shift needs >= 1 instance")
    n = len(ordered)
    cx = sum(it[3] for it in ordered) / n
    cy = sum(it[4] for it in ordered) / n
    weights = [it[2] * taxonomy.weight(it[1]) for it in ordered]
    total = sum(weights)
    if not total > 0:
        raise RiskError("total area-hazard weight is zero; risk centroid undefined")
    ex = sum(w * it[3] for w, it in zip(weights, ordered)) / total
    ey = sum(w * it[4] for w, it in zip(weights, ordered)) / total
    return CentroidShift((cx, cy), (ex, ey), math.hypot(ex - cx, ey - cy))


def survey_risk(
    items: Sequence[RiskItem],
    k: int,
    taxonomy: Taxonomy,
    axis_angle_deg: float = 0.0,
) -> tuple[list[SectorMetrics], CentroidShift]:
    """Partition a survey and compute all sector metrics plus the centroid shift.

    With a single sector the min-max normalization is undefined; both norms
    then take the degenerate convention value 0.5.
    """
    coords = [alongshore_coordinate(x, y, axis_angle_deg) for _, _, _, x, y in items]
    sectors = partition_sectors(coords, k)
    assignment = assign_sectors(coords, sectors)
    grouped: list[list[RiskItem]] = [[] for _ in sectors]
    for item, sector_idx in zip(items, assignment):
        grouped[int(sector_idx)].append(item)
    ccis = [compute_cci(g, s) for g, s in zip(grouped, sectors)]
    eris = [compute_eri(g, taxonomy) for g in grouped]
    if k == 1:
        cci_norms = [0.5]
        eri_norms = [0.5]
    else:
        cci_norms = minmax_normalize(ccis)
        eri_norms = minmax_normalize(eris)
    metrics = [
        SectorMetrics(s, len(g), cci, eri, cn, en)
        for s, g, cci, eri, cn, en in zip(sectors, grouped, ccis, eris, cci_norms, eri_norms)
    ]
    return metrics, centroid_shift(items, taxonomy)
