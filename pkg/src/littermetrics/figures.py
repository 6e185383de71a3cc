"""Report figures rendered to SVG with byte-reproducible output.

All figures go through one save path that pins the SVG hash salt, embeds
fonts as paths (self-contained output), and strips the creation date, so
identical inputs always produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fragmentation import PowerLawFit, SizeBin
from .risk import SectorMetrics
from .sourcesink import GroupComposition

_SVG_RC = {
    "svg.hashsalt": "littermetrics",
    "svg.fonttype": "path",
    "figure.dpi": 100,
}
_BAR_COLORS = ("#4878a8", "#c44e52")


def _save_svg(fig, path: str | Path, manifest_digest: str) -> Path:
    out = Path(path)
    fig.savefig(
        out,
        format="svg",
        metadata={"Date": None, "Description": f"manifest_digest={manifest_digest}"},
    )
    plt.close(fig)
    return out


def render_npd_figure(
    bins: Sequence[SizeBin],
    fits: Sequence[tuple[PowerLawFit, str]],
    path: str | Path,
    manifest_digest: str,
    title: str = "Litter size spectrum",
) -> Path:
    """Log-log scatter of bin NPD versus bin center with fitted lines.

    ``fits`` pairs each fit with a label suffix (e.g. the zone name). Only
    non-empty bins are drawn; fit lines span the bins their segment used.
    """
    occupied = [b for b in bins if b.count > 0]
    with matplotlib.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        if occupied:
            x = np.log10([b.center for b in occupied])
            y = np.log10([b.npd for b in occupied])
            ax.scatter(x, y, s=28, color="#333333", zorder=3, label="bins")
        for (fit, label), color in zip(fits, _BAR_COLORS * len(fits)):
            xs = np.linspace(
                min(np.log10(b.center) for b in occupied) if occupied else -4.0,
                max(np.log10(b.center) for b in occupied) if occupied else 1.0,
                50,
            )
            ax.plot(
                xs,
                fit.log10_c + fit.alpha * xs,
                color=color,
                linewidth=1.5,
                label=(
                    f"{fit.segment.value} {label}: slope {fit.alpha:.3f}, "
                    f"R² {fit.r_squared:.3f}"
                ),
            )
        ax.set_xlabel("log10 bin center (m²)")
        ax.set_ylabel("log10 normalized particle density (1/m²)")
        ax.set_title(title)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        return _save_svg(fig, path, manifest_digest)


def render_sector_figure(
    metrics: Sequence[SectorMetrics],
    path: str | Path,
    manifest_digest: str,
) -> Path:
    """Side-by-side bars of normalized CCI and ERI per sector."""
    with matplotlib.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.5, 4.0))
        positions = np.arange(len(metrics))
        width = 0.38
        ax.bar(
            positions - width / 2,
            [m.cci_norm for m in metrics],
            width,
            color=_BAR_COLORS[0],
            label="CCI (normalized)",
        )
        ax.bar(
            positions + width / 2,
            [m.eri_norm for m in metrics],
            width,
            color=_BAR_COLORS[1],
            label="ERI (normalized)",
        )
        ax.set_xticks(positions)
        ax.set_xticklabels([f"S{m.sector.index}" for m in metrics])
        ax.set_xlabel("sector")
        ax.set_ylabel("normalized index")
        ax.set_ylim(0.0, 1.05)
        ax.set_title("Sector cleanliness and ecological risk")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        return _save_svg(fig, path, manifest_digest)


def render_composition_figure(
    compositions: Sequence[GroupComposition],
    path: str | Path,
    manifest_digest: str,
) -> Path:
    """Count share versus area share per source group."""
    with matplotlib.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        positions = np.arange(len(compositions))
        width = 0.38
        ax.bar(
            positions - width / 2,
            [100.0 * c.count_share for c in compositions],
            width,
            color=_BAR_COLORS[0],
            label="share by count (%)",
        )
        ax.bar(
            positions + width / 2,
            [100.0 * c.area_share for c in compositions],
            width,
            color=_BAR_COLORS[1],
            label="share by area (%)",
        )
        ax.set_xticks(positions)
        ax.set_xticklabels([c.group.value for c in compositions])
        ax.set_ylabel("share (%)")
        ax.set_title("Source composition: abundance vs footprint")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        return _save_svg(fig, path, manifest_digest)
