"""Size-spectrum analysis: geometric bins, normalized density, power-law fits.

Areas are binned on a geometric progression; each bin reports its geometric
center ``sqrt(low * high)`` and the normalized particle density
``npd = count / (high - low)`` in counts per m². Segments above/below the
macro-meso threshold are fitted separately by ordinary least squares of
``log10(npd)`` on ``log10(center)``; slope significance uses the exact
Student t distribution (small bin counts make a normal approximation poor).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betainc

from .errors import FitError
from .ingest import SurveyConfig

MIN_FIT_BINS = 3


class Segment(str, enum.Enum):
    MACRO = "Macro"
    MESO = "Meso"


@dataclass(frozen=True)
class BinEdges:
    """Ascending geometric-progression bin edges in m²."""

    edges: tuple[float, ...]

    @property
    def ratio(self) -> float:
        return self.edges[1] / self.edges[0]

    def __len__(self) -> int:
        return len(self.edges) - 1


@dataclass(frozen=True)
class SizeBin:
    low: float
    high: float
    center: float  # geometric mean of the boundaries
    count: int
    npd: float  # count per m² of bin width

    @property
    def width(self) -> float:
        return self.high - self.low


@dataclass(frozen=True)
class BinningResult:
    bins: tuple[SizeBin, ...]
    overflow_low: int  # areas below the smallest edge
    overflow_high: int  # areas above the largest edge

    @property
    def total(self) -> int:
        return sum(b.count for b in self.bins) + self.overflow_low + self.overflow_high


@dataclass(frozen=True)
class PowerLawFit:
    segment: Segment
    alpha: float
    log10_c: float
    r_squared: float
    p_value: float
    bins_used: int


def build_bins(config: SurveyConfig) -> BinEdges:
    """Bin edges ``bin_min * r**i`` with ``r = (bin_max / bin_min)**(1 / bin_count)``.

    Endpoints are exact; the edge ratio is constant to floating-point
    precision (well within 1e-12 relative).
    """
    edges = np.geomspace(config.bin_min, config.bin_max, config.bin_count + 1)
    return BinEdges(tuple(float(e) for e in edges))


def bin_areas(areas: Iterable[float], edges: BinEdges) -> BinningResult:
    """Count areas per bin: membership [low, high), last bin closed.

    Areas outside the edge range are tallied in the overflow counters rather
    than dropped, so ``sum(counts) + overflows == len(areas)`` always holds.
    """
    edge_arr = np.asarray(edges.edges)
    values = np.asarray(list(areas), dtype=float)
    n_bins = len(edges)
    counts = np.zeros(n_bins, dtype=np.int64)
    overflow_low = overflow_high = 0
    if values.size:
        overflow_low = int((values < edge_arr[0]).sum())
        overflow_high = int((values > edge_arr[-1]).sum())
        inside = values[(values >= edge_arr[0]) & (values <= edge_arr[-1])]
        idx = np.searchsorted(edge_arr, inside, side="right") - 1
        idx[inside == edge_arr[-1]] = n_bins - 1  # last bin is closed above
        counts = np.bincount(idx, minlength=n_bins).astype(np.int64)
    bins = tuple(
        SizeBin(
            low=float(edge_arr[i]),
            high=float(edge_arr[i + 1]),
            center=math.sqrt(float(edge_arr[i]) * float(edge_arr[i + 1])),
            count=int(counts[i]),
            npd=counts[i] / (float(edge_arr[i + 1]) - float(edge_arr[i])),
        )
        for i in range(n_bins)
    )
    return BinningResult(bins, overflow_low, overflow_high)


def segment_bins(bins: Sequence[SizeBin], segment: Segment, threshold: float) -> list[SizeBin]:
    """Bins belonging to a segment: Macro keeps low >= threshold, Meso keeps
    high <= threshold; a bin straddling the threshold belongs to neither;
    empty bins are excluded (log densities are undefined for them)."""
    if segment is Segment.MACRO:
        kept = [b for b in bins if b.low >= threshold]
    else:
        kept = [b for b in bins if b.high <= threshold]
    return [b for b in kept if b.count > 0]


def fit_power_law(bins: Sequence[SizeBin], segment: Segment, threshold: float) -> PowerLawFit:
    """OLS fit of log10(npd) against log10(center) over one segment's bins.

    Returns the slope (the size-spectrum exponent), intercept, R², and the
    two-sided p-value of the slope from a t statistic with (n - 2) degrees
    of freedom. An exact fit (zero residual) reports p = 0.
    """
    usable = segment_bins(bins, segment, threshold)
    m = len(usable)
    if m < MIN_FIT_BINS:
        raise FitError(
            f"insufficient bins for {segment.value} fit: {m} usable, need >= {MIN_FIT_BINS}"
        )
    x = np.log10([b.center for b in usable])
    y = np.log10([b.npd for b in usable])
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(((x - x_mean) ** 2).sum())
    if sxx == 0.0:
        raise FitError(f"zero variance in log10(center) for {segment.value} fit")
    sxy = float(((x - x_mean) * (y - y_mean)).sum())
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    residuals = y - (intercept + slope * x)
    ss_res = float((residuals**2).sum())
    ss_tot = float(((y - y_mean) ** 2).sum())
    if ss_tot == 0.0:
        raise FitError(f"zero variance in log10(npd) for {segment.value} fit")
    r_squared = 1.0 - ss_res / ss_tot
    df = m - 2
    se_sq = ss_res / df / sxx
    if se_sq <= 0.0:
        p_value = 0.0
    else:
        t_stat = slope / math.sqrt(se_sq)
        p_value = 2.0 * (1.0 - t_cdf(abs(t_stat), df))
    return PowerLawFit(segment, slope, intercept, r_squared, p_value, m)


def t_cdf(t: float, df: float) -> float:
    """Student t cumulative distribution via the regularized incomplete beta.

    ``P(T <= t) = 1 - I_x(df/2, 1/2) / 2`` with ``x = df / (t² + df)`` for
    t >= 0, and by symmetry ``t_cdf(-t) = 1 - t_cdf(t)``.
    """
    if not df >= 1:
        raise FitError(f"degrees of freedom must be >= 1, got {df}")
    if math.isnan(t):
        raise FitError("t statistic is NaN")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    x = df / (t * t + df)
    tail = 0.5 * float(betainc(0.5 * df, 0.5, x))
    return 1.0 - tail if t >= 0 else tail
