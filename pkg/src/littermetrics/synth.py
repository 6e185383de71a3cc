"""Synthetic surveys with known ground truth for end-to-end validation.

Areas are drawn from a truncated power law by inverse-CDF sampling; each
area becomes an axis-aligned square (so the true pixel count is exact) and
squares are placed uniformly at random without overlap. The stream comes
from a splitmix64 generator — a tiny, fully specified algorithm whose
identifier is recorded in the truth manifest so any implementation can
reproduce the exact scene from the seed.

Stream consumption order, per instance in id order: one draw for the area,
one for the category, then two per placement attempt (x, then y).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np

from .errors import SynthError
from .ingest import InstanceRecord

PRNG_ALGORITHM = "splitmix64"
_MASK64 = (1 << 64) - 1
_PLACEMENT_ATTEMPTS = 1000


class SplitMix64:
    """splitmix64 stream; uniform doubles use the top 53 bits."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n), via floor(u * n)."""
        if n < 1:
            raise SynthError(f"randint needs n >= 1, got {n}")
        return min(n - 1, int(self.random() * n))


@dataclass(frozen=True)
class SynthConfig:
    n_instances: int
    alpha_true: float
    area_min: float
    area_max: float
    gsd: float
    scene_width_px: int
    scene_height_px: int
    seed: int = 0
    category_mix: tuple[tuple[str, float], ...] = (("G76", 1.0),)

    def __post_init__(self) -> None:
        if self.n_instances < 1:
            raise SynthError(f"n_instances must be >= 1, got {self.n_instances}")
        if self.alpha_true == -1.0:
            raise SynthError("alpha_true = -1 (logarithmic case) is unsupported")
        if not 0 < self.area_min < self.area_max:
            raise SynthError(
                f"area bounds must satisfy 0 < min < max, got ({self.area_min}, {self.area_max})"
            )
        if not self.gsd > 0:
            raise SynthError(f"gsd must be > 0, got {self.gsd}")
        if self.scene_width_px < 1 or self.scene_height_px < 1:
            raise SynthError("scene dimensions must be >= 1 px")
        # Every sampled area must quantize to a square of >= 2 px that fits the scene.
        if math.sqrt(self.area_min) / self.gsd < 1.5:
            raise SynthError(
                "area_min smaller than a 2 px square at this gsd; raise area_min or lower gsd"
            )
        max_side = _side_px(self.area_max, self.gsd)
        if max_side > min(self.scene_width_px, self.scene_height_px):
            raise SynthError(
                f"largest square ({max_side} px) exceeds the scene; enlarge the scene"
            )
        if not self.category_mix:
            raise SynthError("category_mix must not be empty")
        total = sum(p for _, p in self.category_mix)
        if any(p < 0 for _, p in self.category_mix) or abs(total - 1.0) > 1e-9:
            raise SynthError(f"category_mix probabilities must sum to 1, got {total}")


@dataclass(frozen=True)
class SceneResult:
    records: list[InstanceRecord]
    manifest: dict


def sample_powerlaw(n: int, alpha: float, a: float, b: float, rng: SplitMix64) -> list[float]:
    """n inverse-CDF draws from a power law with exponent alpha truncated to [a, b).

    S = (a^(α+1) + u · (b^(α+1) − a^(α+1)))^(1/(α+1)) for u uniform in [0, 1).
    """
    if n < 1:
        raise SynthError(f"sample count must be >= 1, got {n}")
    if not 0 < a < b:
        raise SynthError(f"bounds must satisfy 0 < a < b, got ({a}, {b})")
    if alpha == -1.0:
        raise SynthError("alpha = -1 (logarithmic case) is unsupported")
    g = alpha + 1.0
    a_g = a**g
    b_g = b**g
    return [(a_g + rng.random() * (b_g - a_g)) ** (1.0 / g) for _ in range(n)]


def _side_px(area_m2: float, gsd: float) -> int:
    """Square side in pixels: round(sqrt(area)/gsd), half away from zero, min 2."""
    return max(2, int(math.floor(math.sqrt(area_m2) / gsd + 0.5)))


def _pick_category(mix: Sequence[tuple[str, float]], u: float) -> str:
    acc = 0.0
    for gcode, prob in mix[:-1]:
        acc += prob
        if u < acc:
            return gcode
    return mix[-1][0]


def generate_scene(config: SynthConfig) -> SceneResult:
    """Place non-overlapping squares with power-law areas; returns records + truth.

    Raises when an instance cannot be placed within the retry budget — the
    scene is too crowded and should be enlarged.
    """
    rng = SplitMix64(config.seed)
    n = config.n_instances
    areas = sample_powerlaw(n, config.alpha_true, config.area_min, config.area_max, rng)
    gcodes = [_pick_category(config.category_mix, rng.random()) for _ in range(n)]
    sides = [_side_px(area, config.gsd) for area in areas]
    # Random sequential packing jams when the rare big squares arrive after
    # thousands of small ones have fragmented the free space, so placement
    # runs largest-first (ties broken by instance id); ids keep draw order.
    order = sorted(range(n), key=lambda i: (-sides[i], i))
    placed_x0 = np.empty(n, dtype=np.int64)
    placed_y0 = np.empty(n, dtype=np.int64)
    placed_x1 = np.empty(n, dtype=np.int64)
    placed_y1 = np.empty(n, dtype=np.int64)
    origins: list[tuple[int, int]] = [(0, 0)] * n
    for rank, idx in enumerate(order):
        side = sides[idx]
        for attempt in range(_PLACEMENT_ATTEMPTS):
            x0 = rng.randint(config.scene_width_px - side + 1)
            y0 = rng.randint(config.scene_height_px - side + 1)
            x1 = x0 + side
            y1 = y0 + side
            if rank == 0:
                collision = False
            else:
                collision = bool(
                    (
                        (placed_x0[:rank] < x1)
                        & (placed_x1[:rank] > x0)
                        & (placed_y0[:rank] < y1)
                        & (placed_y1[:rank] > y0)
                    ).any()
                )
            if not collision:
                break
        else:
            raise SynthError(
                f"could not place instance {idx + 1} of side {side} px after "
                f"{_PLACEMENT_ATTEMPTS} attempts; enlarge the scene"
            )
        placed_x0[rank], placed_y0[rank], placed_x1[rank], placed_y1[rank] = x0, y0, x1, y1
        origins[idx] = (x0, y0)
    records: list[InstanceRecord] = []
    truth_instances: list[dict] = []
    for i in range(n):
        x0, y0 = origins[i]
        side = sides[i]
        polygon = (
            (float(x0), float(y0)),
            (float(x0 + side), float(y0)),
            (float(x0 + side), float(y0 + side)),
            (float(x0), float(y0 + side)),
        )
        records.append(InstanceRecord(id=i + 1, gcode=gcodes[i], polygon=polygon))
        truth_instances.append(
            {
                "id": i + 1,
                "gcode": gcodes[i],
                "true_area_m2": areas[i],
                "origin_px": [int(x0), int(y0)],
                "side_px": side,
            }
        )
    manifest = {
        "prng": PRNG_ALGORITHM,
        "alpha_true": config.alpha_true,
        "config": asdict(config),
        "instances": truth_instances,
    }
    return SceneResult(records, manifest)


def apply_dropout(records: Sequence[InstanceRecord], rate: float, rng: SplitMix64) -> list[InstanceRecord]:
    """Keep each record independently with probability 1 - rate."""
    if not 0.0 <= rate < 1.0:
        raise SynthError(f"dropout rate must be in [0, 1), got {rate}")
    return [rec for rec in records if rng.random() >= rate]


def assign_confidences(
    records: Sequence[InstanceRecord], rng: SplitMix64, jitter: float = 0.0
) -> list[InstanceRecord]:
    """Attach detection confidences: 1.0, or uniform in [1 - jitter, 1] when jittered."""
    if not 0.0 <= jitter <= 1.0:
        raise SynthError(f"confidence jitter must be in [0, 1], got {jitter}")
    return [
        replace(rec, confidence=1.0 - jitter * rng.random())
        for rec in records
    ]
