"""Shared fixtures and geometry oracles.

The rasterization oracle here intentionally mirrors the production crossing
arithmetic expression (``x0 + (yc - y0) * slope``) so that agreement can be
asserted bit-exactly: any reordering of that expression changes low bits.
The *decision logic* (per-center parity scan) is independent of the
production run-pairing code path.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from littermetrics import Taxonomy, default_taxonomy


@pytest.fixture(scope="session")
def taxonomy() -> Taxonomy:
    return default_taxonomy()


def square(x0: float, y0: float, side: float) -> list[tuple[float, float]]:
    return [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)]


def brute_force_pixels(polygon) -> set[tuple[int, int]]:
    """Per-pixel-center parity scan; covered iff an odd number of edge
    crossings lies at or left of the center."""
    pts = np.asarray(polygon, dtype=float)
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    covered: set[tuple[int, int]] = set()
    edges = []
    n = len(pts)
    for k in range(n):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % n]
        if y0 != y1:
            edges.append((x0, y0, x1, y1))
    j_lo = math.ceil(ymin - 0.5)
    j_hi = math.floor(ymax - 0.5)
    i_lo = math.ceil(xmin - 0.5)
    i_hi = math.floor(xmax - 0.5)
    if i_hi < i_lo or j_hi < j_lo:
        return covered
    centers_x = np.arange(i_lo, i_hi + 1) + 0.5
    for j in range(j_lo, j_hi + 1):
        yc = j + 0.5
        crossings = []
        for x0, y0, x1, y1 in edges:
            ylo, yhi = (y0, y1) if y0 < y1 else (y1, y0)
            if ylo <= yc < yhi:
                slope = (x1 - x0) / (y1 - y0)
                crossings.append(x0 + (yc - y0) * slope)
        if not crossings:
            continue
        cross = np.array(crossings)
        parity = (cross[None, :] <= centers_x[:, None]).sum(axis=1) % 2
        for i in np.nonzero(parity == 1)[0]:
            covered.add((int(i_lo + i), j))
    return covered


def random_convex_polygon(
    rng: np.random.Generator, min_area: float = 100.0, max_area: float = 5000.0
) -> list[tuple[float, float]]:
    """Convex hull of random disc points, scaled to a target pixel area."""
    while True:
        n = int(rng.integers(6, 16))
        raw = rng.normal(size=(n, 2))
        raw /= np.maximum(np.linalg.norm(raw, axis=1, keepdims=True), 1e-9)
        raw *= rng.uniform(0.3, 1.0, size=(n, 1))
        try:
            hull = ConvexHull(raw)
        except Exception:  # degenerate sample; retry
            continue
        verts = raw[hull.vertices]
        area0 = _shoelace(verts)
        if area0 <= 0:
            continue
        target = rng.uniform(min_area * 2.0, max_area)
        scale = math.sqrt(target / area0)
        offset = rng.uniform(5.0, 200.0, size=2)
        pts = verts * scale + offset
        if _shoelace(pts) >= min_area:
            return [(float(x), float(y)) for x, y in pts]


def random_star_polygon(rng: np.random.Generator) -> list[tuple[float, float]]:
    """Star-shaped (generally concave) polygon around a random center."""
    n = int(rng.integers(5, 14))
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
    radii = rng.uniform(4.0, 40.0, n)
    cx, cy = rng.uniform(50.0, 150.0, 2)
    xs = cx + radii * np.cos(angles)
    ys = cy + radii * np.sin(angles)
    return [(float(x), float(y)) for x, y in zip(xs, ys)]


def _shoelace(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))
