"""Polygon geometry: pixel-exact rasterization, analytic areas, centroids.

Rasterization counts pixel centers ``(i + 0.5, j + 0.5)``. Coverage uses
half-open intervals in both axes, which realises the standard top-left fill
convention (a center exactly on a boundary belongs to the polygon whose
interior lies to the right/below):

* an edge contributes a crossing on scanline ``y_c`` iff
  ``min(ey) <= y_c < max(ey)`` (horizontal edges never cross);
* the crossing abscissa is ``x0 + (y_c - y0) * slope`` with
  ``slope = (x1 - x0) / (y1 - y0)``;
* a row run covers the centers with ``x_enter <= i + 0.5 < x_exit``.

Adjacent polygons that share an edge therefore partition pixels without
double counting, and results are invariant under integer translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

Point = tuple[float, float]


@dataclass(frozen=True)
class PixelFootprint:
    """Rasterized pixel count with the covered-pixel bounding box (inclusive indices)."""

    instance_id: int | None
    pixel_count: int
    bbox: tuple[int, int, int, int]  # (col_min, row_min, col_max, row_max)


@dataclass(frozen=True)
class PhysicalArea:
    instance_id: int | None
    area_m2: float


@dataclass(frozen=True)
class ProjectedCentroid:
    instance_id: int | None
    x_m: float
    y_m: float


def _vertex_array(polygon) -> np.ndarray:
    pts = np.asarray(polygon, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise GeometryError(f"polygon must have >= 3 (x, y) vertices, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise GeometryError("polygon has non-finite coordinates")
    return pts


def _first_center_at_or_after(c: np.ndarray) -> np.ndarray:
    """Smallest integer m with m + 0.5 >= c, robust to rounding in ceil(c - 0.5)."""
    m = np.ceil(c - 0.5).astype(np.int64)
    m = np.where(m + 0.5 < c, m + 1, m)
    m = np.where(m - 0.5 >= c, m - 1, m)
    return m


def coverage_runs(polygon) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Covered pixels as horizontal runs: (rows, start_cols, end_cols), ends exclusive.

    Runs are non-empty and ordered by (row, start). The arrays may be empty
    when no pixel center falls inside the polygon.
    """
    pts = _vertex_array(polygon)
    x0 = pts[:, 0]
    y0 = pts[:, 1]
    x1 = np.roll(x0, -1)
    y1 = np.roll(y0, -1)
    keep = y0 != y1  # horizontal edges never cross a scanline
    x0, y0, x1, y1 = x0[keep], y0[keep], x1[keep], y1[keep]
    empty = (np.empty(0, np.int64),) * 3
    if x0.size == 0:
        return empty

    j_first = int(np.ceil(pts[:, 1].min() - 0.5))
    j_last = int(np.floor(pts[:, 1].max() - 0.5))
    if j_last < j_first:
        return empty
    rows = np.arange(j_first, j_last + 1, dtype=np.int64)
    yc = rows.astype(float) + 0.5

    ylo = np.minimum(y0, y1)
    yhi = np.maximum(y0, y1)
    hit = (ylo[None, :] <= yc[:, None]) & (yc[:, None] < yhi[None, :])
    slope = (x1 - x0) / (y1 - y0)
    cross = x0[None, :] + (yc[:, None] - y0[None, :]) * slope[None, :]
    cross = np.where(hit, cross, np.inf)
    cross.sort(axis=1)
    counts = hit.sum(axis=1)
    if (counts % 2).any():
        raise GeometryError("scanline produced an odd crossing count; polygon is degenerate")

    out_rows: list[np.ndarray] = []
    out_starts: list[np.ndarray] = []
    out_ends: list[np.ndarray] = []
    for k in range(0, int(counts.max(initial=0)), 2):
        sel = counts >= k + 2
        start = _first_center_at_or_after(cross[sel, k])
        end = _first_center_at_or_after(cross[sel, k + 1])
        nonempty = end > start
        out_rows.append(rows[sel][nonempty])
        out_starts.append(start[nonempty])
        out_ends.append(end[nonempty])
    if not out_rows:
        return empty
    all_rows = np.concatenate(out_rows)
    all_starts = np.concatenate(out_starts)
    all_ends = np.concatenate(out_ends)
    order = np.lexsort((all_starts, all_rows))
    return all_rows[order], all_starts[order], all_ends[order]


def rasterize(polygon, instance_id: int | None = None) -> PixelFootprint:
    """Scanline-fill the polygon and count covered pixel centers."""
    rows, starts, ends = coverage_runs(polygon)
    if rows.size == 0:
        raise GeometryError("empty rasterization: no pixel centers covered")
    pixel_count = int((ends - starts).sum())
    bbox = (int(starts.min()), int(rows.min()), int((ends - 1).max()), int(rows.max()))
    return PixelFootprint(instance_id, pixel_count, bbox)


def _signed_area(pts: np.ndarray) -> float:
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """True when segment p1p2 intersects p3p4, touching included."""
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and _on_segment(*p3, *p4, *p1):
        return True
    if d2 == 0 and _on_segment(*p3, *p4, *p2):
        return True
    if d3 == 0 and _on_segment(*p1, *p2, *p3):
        return True
    if d4 == 0 and _on_segment(*p1, *p2, *p4):
        return True
    return False


def _has_self_intersection(pts: np.ndarray) -> bool:
    # O(n^2) pairing over non-adjacent edges; litter polygons are small.
    n = len(pts)
    edges = [(tuple(pts[i]), tuple(pts[(i + 1) % n])) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex by construction
            if _segments_intersect(*edges[i], *edges[j]):
                return True
    return False


def shoelace_area(polygon) -> float:
    """Analytic polygon area in px², orientation-independent.

    Serves as the independent check on rasterized pixel counts; rejects
    self-intersecting polygons, for which the formula is meaningless.
    """
    pts = _vertex_array(polygon)
    if _has_self_intersection(pts):
        raise GeometryError("self-intersecting polygon")
    return abs(_signed_area(pts))


def physical_area(footprint: PixelFootprint, gsd: float) -> PhysicalArea:
    """Physical coverage in m²: pixel count times the squared ground sampling distance."""
    if not gsd > 0:
        raise GeometryError(f"gsd must be > 0, got {gsd}")
    gsd_sq = gsd * gsd
    return PhysicalArea(footprint.instance_id, footprint.pixel_count * gsd_sq)


def instance_centroid(polygon, gsd: float, instance_id: int | None = None) -> ProjectedCentroid:
    """Area-weighted polygon centroid scaled to meters."""
    if not gsd > 0:
        raise GeometryError(f"gsd must be > 0, got {gsd}")
    pts = _vertex_array(polygon)
    x = pts[:, 0]
    y = pts[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(cross.sum())
    if area == 0.0:
        raise GeometryError("zero-area polygon has no centroid")
    cx = float(((x + xn) * cross).sum()) / (6.0 * area)
    cy = float(((y + yn) * cross).sum()) / (6.0 * area)
    return ProjectedCentroid(instance_id, cx * gsd, cy * gsd)


@dataclass(frozen=True)
class InstanceMeasurement:
    footprint: PixelFootprint
    area: PhysicalArea
    centroid: ProjectedCentroid


def measure_polygon(polygon, gsd: float, instance_id: int | None = None) -> InstanceMeasurement:
    """Rasterize, convert to physical area, and locate the centroid in one pass."""
    footprint = rasterize(polygon, instance_id)
    return InstanceMeasurement(
        footprint,
        physical_area(footprint, gsd),
        instance_centroid(polygon, gsd, instance_id),
    )
