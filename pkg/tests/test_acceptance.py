"""Release-gate checks for the package.

Each test covers one gate and prints a single ``[Ann] name: PASS/FAIL`` line
(visible with ``pytest -s``) before asserting, so a full run doubles as a
checklist. Tolerances are pinned as module constants; none of them may be
loosened without revisiting the recorded oracle values in the tests below.
"""

import json
import math
import random
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import binom

from littermetrics import (
    CentroidShift,
    GroupComposition,
    Segment,
    SizeBin,
    SourceGroup,
    SplitMix64,
    SurveyConfig,
    SynthConfig,
    average_precision,
    bin_areas,
    build_bins,
    centroid_shift,
    compute_eri,
    coverage_runs,
    default_taxonomy,
    fit_power_law,
    generate_scene,
    map50,
    match,
    overrepresentation,
    per_category_ap,
    physical_area,
    precision_recall,
    rasterize,
    shoelace_area,
    survey_risk,
    t_cdf,
)
from littermetrics.cli import main
from littermetrics.ingest import InstanceRecord
from littermetrics.sourcesink import mean_area_ratio
from littermetrics.synth import apply_dropout, assign_confidences

from conftest import brute_force_pixels, random_convex_polygon, square

GSD = 0.0017
THRESHOLD = 6.25e-4

ALPHA_TOL = 0.10          # recovered exponent, synthetic survey
R2_MIN = 0.98
P_MAX = 1e-3
RUNTIME_MAX_S = 10.0
EXACT_FIT_TOL = 1e-9      # exponent recovery from noiseless bins
RASTER_REL_TOL = 0.02     # pixel count vs shoelace area
ADDITIVITY_REL_TOL = 1e-12
CENTROID_TOL = 1e-12
OVERREP_EXPECTED, OVERREP_TOL = 4.266, 1e-3
MEAN_RATIO_EXPECTED, MEAN_RATIO_TOL = 4.83, 0.01
AP_TOL = 0.01
T_CDF_TOL = 1e-8
SECTOR_SLACK = 1


def check(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    line = f"[A{num:02d}] {name}: {status}{suffix}"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# A01  end-to-end exponent recovery
# ---------------------------------------------------------------------------


def test_a01_power_law_recovery_on_synthetic_survey():
    config = SynthConfig(
        n_instances=10_000,
        alpha_true=-2.0,
        area_min=THRESHOLD,
        area_max=10.0,
        gsd=GSD,
        scene_width_px=20_000,
        scene_height_px=20_000,
        seed=11,
    )
    started = time.perf_counter()
    scene = generate_scene(config)
    areas = [
        physical_area(rasterize(rec.polygon), GSD).area_m2 for rec in scene.records
    ]
    edges = build_bins(SurveyConfig(gsd=GSD))
    fit = fit_power_law(bin_areas(areas, edges).bins, Segment.MACRO, THRESHOLD)
    elapsed = time.perf_counter() - started

    ok = (
        abs(fit.alpha - (-2.0)) <= ALPHA_TOL
        and fit.r_squared >= R2_MIN
        and fit.p_value < P_MAX
        and elapsed < RUNTIME_MAX_S
    )
    check(
        1,
        "power-law recovery on synthetic survey",
        ok,
        f"alpha={fit.alpha:.4f}, r2={fit.r_squared:.4f}, "
        f"p={fit.p_value:.2e}, {elapsed:.2f}s",
    )


# ---------------------------------------------------------------------------
# A02  noiseless fit returns the generating exponent
# ---------------------------------------------------------------------------


def _noiseless_bins(alpha: float, c: float = 7.0) -> list[SizeBin]:
    edges = build_bins(SurveyConfig(gsd=GSD)).edges
    bins = []
    for low, high in zip(edges[:-1], edges[1:]):
        center = math.sqrt(low * high)
        bins.append(SizeBin(low, high, center, count=1, npd=c * center**alpha))
    return bins


def test_a02_exact_fit_recovery():
    worst_alpha, worst_r2 = 0.0, 1.0
    for alpha in (-1.5, -2.0, -2.14):
        fit = fit_power_law(_noiseless_bins(alpha), Segment.MACRO, THRESHOLD)
        worst_alpha = max(worst_alpha, abs(fit.alpha - alpha))
        worst_r2 = min(worst_r2, fit.r_squared)
    ok = worst_alpha <= EXACT_FIT_TOL and worst_r2 == 1.0
    check(
        2,
        "noiseless log-log fit recovery",
        ok,
        f"max |alpha error|={worst_alpha:.2e}, min r2={worst_r2}",
    )


# ---------------------------------------------------------------------------
# A03  rasterizer agrees with geometry and with a brute-force scan
# ---------------------------------------------------------------------------


def test_a03_rasterizer_parity_and_area_agreement():
    rng = np.random.default_rng(90)
    worst_rel = 0.0
    mismatches = 0
    for _ in range(1000):
        polygon = random_convex_polygon(rng, min_area=100.0, max_area=4000.0)
        rows, starts, ends = coverage_runs(polygon)
        count = int((ends - starts).sum())
        exact = shoelace_area(polygon)
        worst_rel = max(worst_rel, abs(count - exact) / exact)
        covered = {
            (col, row)
            for row, start, end in zip(rows, starts, ends)
            for col in range(start, end)
        }
        if covered != brute_force_pixels(polygon):
            mismatches += 1
    ok = worst_rel <= RASTER_REL_TOL and mismatches == 0
    check(
        3,
        "rasterizer parity and area agreement (1000 convex polygons)",
        ok,
        f"worst rel error={worst_rel:.4f}, scan mismatches={mismatches}",
    )


# ---------------------------------------------------------------------------
# A04  pixel-count to physical-area arithmetic
# ---------------------------------------------------------------------------


def test_a04_pixel_to_area_arithmetic():
    footprint = rasterize(square(0, 0, 10))
    assert footprint.pixel_count == 100
    value = physical_area(footprint, GSD).area_m2
    error_ulps = abs(value - 2.89e-4) / math.ulp(2.89e-4)
    ok = error_ulps <= 1.0
    check(4, "pixel-to-area arithmetic (100 px @ 0.0017 m/px)", ok,
          f"{value!r}, {error_ulps:.1f} ulp from 2.89e-4")


# ---------------------------------------------------------------------------
# A05  hazard-weighted risk index: fixture value and additivity
# ---------------------------------------------------------------------------


def test_a05_risk_index_fixture_and_additivity():
    taxonomy = default_taxonomy()
    fixture = [(1, "G4", 0.5, 0.0, 0.0), (2, "G76", 1.0, 0.0, 0.0)]
    fixture_value = compute_eri(fixture, taxonomy)

    rng = random.Random(17)
    gcodes = [entry.gcode for entry in taxonomy]
    items = [
        (i, rng.choice(gcodes), rng.uniform(1e-4, 2.0), 0.0, 0.0)
        for i in range(60)
    ]
    whole = compute_eri(items, taxonomy)
    worst = 0.0
    for _ in range(100):
        cut = rng.randrange(1, len(items))
        shuffled = items[:]
        rng.shuffle(shuffled)
        split_sum = compute_eri(shuffled[:cut], taxonomy) + compute_eri(
            shuffled[cut:], taxonomy
        )
        worst = max(worst, abs(split_sum - whole) / abs(whole))

    ok = fixture_value == 7.0 and worst <= ADDITIVITY_REL_TOL
    check(
        5,
        "risk index fixture and additivity",
        ok,
        f"fixture={fixture_value}, worst split error={worst:.2e}",
    )


# ---------------------------------------------------------------------------
# A06  weighted-centroid shift fixtures
# ---------------------------------------------------------------------------


def test_a06_centroid_shift_fixtures():
    taxonomy = default_taxonomy()
    rng = random.Random(4)
    uniform = [
        (i, "G76", 0.25, rng.uniform(0, 50), rng.uniform(0, 3)) for i in range(40)
    ]
    uniform_delta = centroid_shift(uniform, taxonomy).delta_m

    two_point = [(1, "G4", 0.125, 0.0, 0.0), (2, "G4", 0.375, 10.0, 0.0)]
    shift = centroid_shift(two_point, taxonomy)
    assert shift == CentroidShift((5.0, 0.0), (7.5, 0.0), 2.5)

    ok = uniform_delta <= CENTROID_TOL and shift.delta_m == 2.5
    check(
        6,
        "centroid shift fixtures",
        ok,
        f"uniform delta={uniform_delta:.2e}, two-point delta={shift.delta_m}",
    )


# ---------------------------------------------------------------------------
# A07  overrepresentation quotients
# ---------------------------------------------------------------------------


def _composition(count_share, area_share, mean_area):
    return GroupComposition(
        group=SourceGroup.FISHING,
        count=10,
        count_share=count_share,
        total_area_m2=mean_area * 10,
        area_share=area_share,
        mean_item_area_m2=mean_area,
    )


def test_a07_overrepresentation_quotients():
    quotient = overrepresentation(_composition(0.0064, 0.0273, 0.0127))
    ratio = mean_area_ratio(
        _composition(0.0064, 0.0273, 0.0127), _composition(0.9, 0.8, 0.00263)
    )
    ok = (
        abs(quotient - OVERREP_EXPECTED) <= OVERREP_TOL
        and abs(ratio - MEAN_RATIO_EXPECTED) <= MEAN_RATIO_TOL
    )
    check(
        7,
        "overrepresentation quotients",
        ok,
        f"share quotient={quotient:.4f}, mean-area ratio={ratio:.3f}",
    )


# ---------------------------------------------------------------------------
# A08  detection metrics
# ---------------------------------------------------------------------------


def _rec(i, polygon, confidence=None, gcode="G76"):
    return InstanceRecord(
        id=i, gcode=gcode, polygon=tuple(map(tuple, polygon)), confidence=confidence
    )


def test_a08_detection_metrics():
    # perfect detections: every metric is exactly 1
    gts = [_rec(1, square(0, 0, 10), gcode="G4"), _rec(2, square(30, 0, 10))]
    dets = [
        _rec(1, square(0, 0, 10), 1.0, gcode="G4"),
        _rec(2, square(30, 0, 10), 1.0),
    ]
    pr = precision_recall(match(dets, gts))
    perfect_map = map50(per_category_ap(dets, gts))
    perfect = pr.precision == 1.0 and pr.recall == 1.0 and perfect_map == 1.0

    # ranked fixture: hit .9, miss .8, hit .7 against two targets
    gts = [_rec(1, square(0, 0, 10)), _rec(2, square(30, 0, 10))]
    dets = [
        _rec(1, square(0, 0, 10), 0.9),
        _rec(2, square(60, 0, 10), 0.8),
        _rec(3, square(30, 0, 10), 0.7),
    ]
    ap = average_precision(dets, gts).ap
    exact_step = 5.0 / 6.0  # 0.5 * 1 + 0.5 * (2/3), by hand
    ap_ok = abs(ap - exact_step) <= AP_TOL

    # synthetic scene with 20% dropout: no false positives, recall binomial
    scene = generate_scene(
        SynthConfig(
            n_instances=500,
            alpha_true=-2.0,
            area_min=THRESHOLD,
            area_max=0.05,
            gsd=GSD,
            scene_width_px=5000,
            scene_height_px=5000,
            seed=33,
        )
    )
    kept = apply_dropout(scene.records, 0.2, SplitMix64(21))
    detections = assign_confidences(kept, SplitMix64(22))
    pr_drop = precision_recall(match(detections, scene.records))
    low, high = binom.ppf([0.005, 0.995], 500, 0.8) / 500.0
    drop_ok = pr_drop.precision == 1.0 and low <= pr_drop.recall <= high

    ok = perfect and ap_ok and drop_ok
    check(
        8,
        "detection metrics",
        ok,
        f"perfect map={perfect_map}, |ap-{exact_step:.4f}|={abs(ap - exact_step):.5f}, "
        f"dropout P={pr_drop.precision} R={pr_drop.recall:.3f} in [{low:.3f}, {high:.3f}]",
    )


# ---------------------------------------------------------------------------
# A09  CLI determinism: identical invocations are byte-identical
# ---------------------------------------------------------------------------


def _snapshot(root):
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_a09_cli_determinism(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")

    synth_dir = tmp_path / "synth"
    local = tmp_path / "local.json"
    local.write_text(
        json.dumps(
            {
                "gsd_m_per_px": GSD,
                "shapes": [
                    {
                        "id": 1,
                        "label": "G76",
                        "points": [[10, 10], [20, 10], [15, 20]],
                        "tile": [1, 2],
                    }
                ],
            }
        )
    )
    ann = synth_dir / "synth_annotations.json"
    dets = synth_dir / "synth_detections.json"
    commands = {
        "synth": [
            "synth", "--n", "1200", "--alpha", "-2.0",
            "--area-min", str(THRESHOLD), "--area-max", "1.0",
            "--scene-width", "12000", "--scene-height", "12000",
            "--mix", "G76:0.7,G4:0.3", "--dropout", "0.15",
            "--confidence-jitter", "0.3",
            "--gsd", str(GSD), "--seed", "7", "--out-dir", str(synth_dir),
        ],
        "areas": ["areas", "--annotations", str(ann),
                  "--out-dir", str(tmp_path / "areas")],
        "npd": ["npd", "--annotations", str(ann),
                "--out-dir", str(tmp_path / "npd")],
        "risk": ["risk", "--annotations", str(ann),
                 "--out-dir", str(tmp_path / "risk")],
        "sourcesink": ["sourcesink", "--annotations", str(ann),
                       "--out-dir", str(tmp_path / "sourcesink")],
        "eval": ["eval", "--detections", str(dets), "--ground-truth", str(ann),
                 "--out-dir", str(tmp_path / "eval")],
        "tiles": ["tiles", "--width", "2048", "--height", "1024",
                  "--annotations", str(local), "--globalized", "global.json",
                  "--out-dir", str(tmp_path / "tiles")],
    }

    unstable = []
    for name, argv in commands.items():
        out_dir = tmp_path / ("synth" if name == "synth" else name)
        assert main(argv) == 0, capsys.readouterr().err
        first = _snapshot(out_dir)
        assert first, f"{name} produced no output files"
        assert main(argv) == 0, capsys.readouterr().err
        if _snapshot(out_dir) != first:
            unstable.append(name)
    capsys.readouterr()

    ok = not unstable
    with capsys.disabled():
        check(
            9,
            "CLI determinism across repeated identical invocations",
            ok,
            f"{len(commands)} commands, unstable={unstable or 'none'}",
        )


# ---------------------------------------------------------------------------
# A10  t-distribution CDF
# ---------------------------------------------------------------------------


def _t_density(x: float, df: float) -> float:
    log_norm = (
        math.lgamma((df + 1.0) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
    )
    return math.exp(log_norm) * (1.0 + x * x / df) ** (-(df + 1.0) / 2.0)


def _quad_cdf(t: float, df: float) -> float:
    if t >= 0:
        tail, _ = quad(_t_density, t, math.inf, args=(df,))
        return 1.0 - tail
    head, _ = quad(_t_density, -math.inf, t, args=(df,))
    return head


def test_a10_t_distribution_cdf():
    medians_exact = all(t_cdf(0.0, df) == 0.5 for df in range(1, 31))
    cauchy_exact = t_cdf(1.0, 1.0) == 0.75

    rng = random.Random(23)
    worst = 0.0
    for _ in range(50):
        t = rng.uniform(-6.0, 6.0)
        df = rng.choice([1, 2, 3, 5, 8, 12, 20, 30, 2.5, 7.5])
        worst = max(worst, abs(t_cdf(t, df) - _quad_cdf(t, df)))

    ok = medians_exact and cauchy_exact and worst <= T_CDF_TOL
    check(
        10,
        "t-distribution CDF",
        ok,
        f"medians exact={medians_exact}, cdf(1,1)={t_cdf(1.0, 1.0)}, "
        f"worst quad error={worst:.2e}",
    )


# ---------------------------------------------------------------------------
# A11  equal-quantile sector partition
# ---------------------------------------------------------------------------


def test_a11_sector_partition_completeness():
    rng = np.random.default_rng(5)
    coords = rng.uniform(0.0, 120.0, size=10_000)
    items = [(i, "G76", 0.01, 0.0, float(x)) for i, x in enumerate(coords)]
    metrics, _ = survey_risk(items, k=10, taxonomy=default_taxonomy())
    counts = [m.count for m in metrics]
    ok = sum(counts) == 10_000 and all(abs(c - 1000) <= SECTOR_SLACK for c in counts)
    check(
        11,
        "equal-quantile sector partition",
        ok,
        f"sum={sum(counts)}, min={min(counts)}, max={max(counts)}",
    )
