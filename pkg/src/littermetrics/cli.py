"""Command-line front end.

Each subcommand is one batch analysis: parse annotations, run the relevant
computations, and write reports (CSV/JSON, plus SVG figures) into the output
directory together with a ``run_manifest.json``. Warnings go to stderr and
never change report contents; any fatal problem exits nonzero with a single
``error:`` line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import AnnotationError, ConfigError, LitterMetricsError, TileError
from .evalmetrics import (
    DEFAULT_IOU_THRESHOLD,
    map50,
    match,
    per_category_ap,
    precision_recall,
)
from .figures import render_composition_figure, render_npd_figure, render_sector_figure
from .fragmentation import Segment, bin_areas, build_bins, fit_power_law
from .errors import FitError, GeometryError
from .geometry import measure_polygon
from .ingest import (
    AnnotationSchema,
    InstanceRecord,
    ParseResult,
    SurveyConfig,
    Taxonomy,
    default_taxonomy,
    infer_schema,
    load_taxonomy,
    parse_annotations,
    parse_config_text,
    to_polygon_json,
    validate_instances,
)
from .reporting import build_manifest, write_csv_report, write_json_report, write_manifest
from .risk import survey_risk
from .sourcesink import SourceSinkError, compose, overrepresentation
from .synth import SplitMix64, SynthConfig, apply_dropout, assign_confidences, generate_scene
from .tiler import TileGrid, to_global

_AREAS_HEADER = [
    "id",
    "gcode",
    "group",
    "zone",
    "pixels",
    "area_m2",
    "centroid_x_m",
    "centroid_y_m",
]
_SECTORS_HEADER = [
    "sector",
    "lower_m",
    "upper_m",
    "length_m",
    "count",
    "cci",
    "eri",
    "cci_norm",
    "eri_norm",
]
_GROUPS_HEADER = [
    "group",
    "count",
    "count_share",
    "total_area_m2",
    "area_share",
    "mean_item_area_m2",
]
_TILES_HEADER = ["row", "col", "origin_x_px", "origin_y_px", "width_px", "height_px"]


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _info(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _config_file_values(args) -> dict:
    if not args.config:
        return {}
    return parse_config_text(Path(args.config).read_text())


def _resolve_config(args, doc_gsd: float | None = None) -> SurveyConfig:
    """Build the survey configuration.

    ``gsd`` resolution order: ``--gsd`` flag, then the config file, then the
    annotation document header; anything else is fatal. All other fields come
    from the config file or their defaults.
    """
    values = _config_file_values(args)
    if args.gsd is not None:
        values["gsd"] = args.gsd
    if "gsd" not in values:
        if doc_gsd is not None:
            values["gsd"] = doc_gsd
        else:
            raise ConfigError(
                "gsd required: pass --gsd, set gsd in the config file, "
                "or use an annotation document with gsd_m_per_px"
            )
    return SurveyConfig(**values)


def _read_annotations(path: str, schema_name: str | None) -> ParseResult:
    schema = AnnotationSchema(schema_name) if schema_name else infer_schema(path)
    result = parse_annotations(Path(path).read_text(), schema)
    for issue in result.issues:
        _warn(f"{path}: {issue}")
    return result


def _load_taxonomy(args) -> Taxonomy:
    if getattr(args, "taxonomy", None):
        return load_taxonomy(Path(args.taxonomy).read_text())
    return default_taxonomy()


def _accepted_records(parse: ParseResult, taxonomy: Taxonomy) -> list[InstanceRecord]:
    validation = validate_instances(parse.records, taxonomy)
    for rejection in validation.rejected:
        _warn(f"instance {rejection.record.id} rejected: {rejection.reason}")
    return list(validation.accepted)


def _measure_records(records, gsd: float):
    """Rasterize and measure each record, skipping degenerate geometry."""
    measured = []
    for rec in records:
        try:
            measurement = measure_polygon(rec.polygon, gsd, rec.id)
        except GeometryError as exc:
            _warn(f"instance {rec.id} skipped: {exc}")
            continue
        measured.append((rec, measurement))
    return measured


def _survey_inputs(args) -> dict[str, str]:
    inputs: dict[str, str] = {}
    for name in ("annotations", "taxonomy", "config", "areas_csv", "detections", "ground_truth"):
        value = getattr(args, name, None)
        if value:
            inputs[name.replace("_", "-")] = value
    return inputs


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit_manifest(args, argv_used, config, out: Path):
    manifest = build_manifest(argv_used, config, _survey_inputs(args))
    write_manifest(manifest, out)
    return manifest


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_areas(args, argv_used) -> int:
    parse = _read_annotations(args.annotations, args.schema)
    config = _resolve_config(args, parse.gsd)
    taxonomy = _load_taxonomy(args)
    accepted = _accepted_records(parse, taxonomy)
    measured = _measure_records(accepted, config.gsd)

    out = _out_dir(args)
    manifest = _emit_manifest(args, argv_used, config, out)
    rows = [
        (
            rec.id,
            rec.gcode,
            taxonomy.group(rec.gcode).value,
            rec.zone.value if rec.zone else None,
            m.footprint.pixel_count,
            m.area.area_m2,
            m.centroid.x_m,
            m.centroid.y_m,
        )
        for rec, m in measured
    ]
    write_csv_report(out / "areas.csv", _AREAS_HEADER, rows, manifest.digest)
    if not rows:
        _warn("no valid instances; wrote a header-only areas.csv")
    _info(f"wrote {out / 'areas.csv'} ({len(rows)} instances)")
    return 0


def _areas_from_csv(path: str) -> list[tuple[str, float]]:
    """Read (zone, area_m2) pairs back from an areas.csv report."""
    from .reporting import read_csv_report

    header, rows = read_csv_report(path)
    if header != _AREAS_HEADER:
        raise AnnotationError(
            f"{path}: expected an areas report with header {','.join(_AREAS_HEADER)}"
        )
    zone_col = _AREAS_HEADER.index("zone")
    area_col = _AREAS_HEADER.index("area_m2")
    out = []
    for row in rows:
        try:
            out.append((row[zone_col], float(row[area_col])))
        except (IndexError, ValueError) as exc:
            raise AnnotationError(f"{path}: malformed row {row!r}") from exc
    return out


def cmd_npd(args, argv_used) -> int:
    if bool(args.annotations) == bool(args.areas_csv):
        raise ConfigError("npd needs exactly one of --annotations or --areas-csv")

    if args.annotations:
        parse = _read_annotations(args.annotations, args.schema)
        config = _resolve_config(args, parse.gsd)
        taxonomy = _load_taxonomy(args)
        accepted = _accepted_records(parse, taxonomy)
        measured = _measure_records(accepted, config.gsd)
        zone_areas = [
            (rec.zone.value if rec.zone else "", m.area.area_m2) for rec, m in measured
        ]
    else:
        config = _resolve_config(args)
        zone_areas = _areas_from_csv(args.areas_csv)

    if args.zone != "all":
        zone_areas = [(z, a) for z, a in zone_areas if z == args.zone]
        zone_keys = [args.zone]
    else:
        zone_keys = ["all"] + sorted({z for z, _ in zone_areas if z})

    edges = build_bins(config)
    out = _out_dir(args)
    manifest = _emit_manifest(args, argv_used, config, out)

    fits = []
    bin_rows = []
    for zone in zone_keys:
        areas = [a for z, a in zone_areas if zone == "all" or z == zone]
        binned = bin_areas(areas, edges)
        if binned.overflow_low or binned.overflow_high:
            _warn(
                f"zone {zone}: {binned.overflow_low} areas below and "
                f"{binned.overflow_high} above the bin range were excluded"
            )
        for i, b in enumerate(binned.bins):
            bin_rows.append((zone, i, b.low, b.high, b.center, b.count, b.npd))
        zone_fits = []
        for segment in (Segment.MACRO, Segment.MESO):
            try:
                fit = fit_power_law(binned.bins, segment, config.macro_meso_threshold)
            except FitError as exc:
                _warn(f"zone {zone}: {exc}")
                continue
            zone_fits.append(fit)
            fits.append(
                {
                    "segment": fit.segment.value,
                    "zone": zone,
                    "alpha": fit.alpha,
                    "log10_c": fit.log10_c,
                    "r_squared": fit.r_squared,
                    "p_value": fit.p_value,
                    "bins_used": fit.bins_used,
                }
            )
        if zone_fits:
            render_npd_figure(
                binned.bins,
                [(fit, zone) for fit in zone_fits],
                out / f"npd_{zone}.svg",
                manifest.digest,
            )

    if not fits:
        raise FitError(
            "no usable power-law fit in any requested zone "
            f"(segments {Segment.MACRO.value} and {Segment.MESO.value})"
        )

    write_csv_report(
        out / "npd_bins.csv",
        ["zone", "bin", "low_m2", "high_m2", "center_m2", "count", "npd_per_m2"],
        bin_rows,
        manifest.digest,
    )
    write_json_report(out / "npd_fits.json", {"fits": fits}, manifest.digest)
    _info(f"wrote {out / 'npd_fits.json'} ({len(fits)} fits)")
    return 0


def cmd_risk(args, argv_used) -> int:
    parse = _read_annotations(args.annotations, args.schema)
    config = _resolve_config(args, parse.gsd)
    taxonomy = _load_taxonomy(args)
    accepted = _accepted_records(parse, taxonomy)
    measured = _measure_records(accepted, config.gsd)

    items = [
        (rec.id, rec.gcode, m.area.area_m2, m.centroid.x_m, m.centroid.y_m)
        for rec, m in measured
    ]
    metrics, shift = survey_risk(items, config.sector_count, taxonomy, args.axis_angle)

    out = _out_dir(args)
    manifest = _emit_manifest(args, argv_used, config, out)
    rows = [
        (
            m.sector.index,
            m.sector.lower_m,
            m.sector.upper_m,
            m.sector.length_m,
            m.count,
            m.cci,
            m.eri,
            m.cci_norm,
            m.eri_norm,
        )
        for m in metrics
    ]
    write_csv_report(out / "sectors.csv", _SECTORS_HEADER, rows, manifest.digest)
    write_json_report(
        out / "centroid.json",
        {
            "c_count": list(shift.c_count),
            "c_eri": list(shift.c_eri),
            "delta_m": shift.delta_m,
        },
        manifest.digest,
    )
    render_sector_figure(metrics, out / "sectors.svg", manifest.digest)
    _info(f"wrote {out / 'sectors.csv'} ({len(metrics)} sectors)")
    return 0


def cmd_sourcesink(args, argv_used) -> int:
    parse = _read_annotations(args.annotations, args.schema)
    config = _resolve_config(args, parse.gsd)
    taxonomy = _load_taxonomy(args)
    accepted = _accepted_records(parse, taxonomy)
    measured = _measure_records(accepted, config.gsd)

    compositions = compose(
        [(rec.id, rec.gcode, m.area.area_m2) for rec, m in measured], taxonomy
    )

    out = _out_dir(args)
    manifest = _emit_manifest(args, argv_used, config, out)
    rows = [
        (
            c.group.value,
            c.count,
            c.count_share,
            c.total_area_m2,
            c.area_share,
            c.mean_item_area_m2,
        )
        for c in compositions
    ]
    write_csv_report(out / "source_groups.csv", _GROUPS_HEADER, rows, manifest.digest)
    render_composition_figure(compositions, out / "source_groups.svg", manifest.digest)
    for c in compositions:
        try:
            print(f"{c.group.value}: overrepresentation {overrepresentation(c):.2f}")
        except SourceSinkError:
            print(f"{c.group.value}: overrepresentation n/a (no instances)")
    return 0


def cmd_eval(args, argv_used) -> int:
    det_parse = _read_annotations(args.detections, args.schema)
    gt_parse = _read_annotations(args.ground_truth, args.schema)
    detections, ground_truth = det_parse.records, gt_parse.records

    per_category = per_category_ap(detections, ground_truth, args.iou)
    overall = precision_recall(match(detections, ground_truth, args.iou))

    payload = {
        "iou_threshold": args.iou,
        "per_category": [
            {"gcode": r.category, "ap": r.ap, "tp": r.tp, "fp": r.fp, "fn": r.fn}
            for r in per_category
        ],
        "map50": map50(per_category),
        "precision": overall.precision,
        "recall": overall.recall,
        "precision_defined": overall.precision_defined,
        "recall_defined": overall.recall_defined,
    }
    if args.confidence_cut is not None:
        survivors = [
            d
            for d in detections
            if d.confidence is not None and d.confidence >= args.confidence_cut
        ]
        at_cut = precision_recall(match(survivors, ground_truth, args.iou))
        payload["confidence_cut"] = args.confidence_cut
        payload["precision_at_cut"] = at_cut.precision
        payload["recall_at_cut"] = at_cut.recall

    out = _out_dir(args)
    manifest = _emit_manifest(args, argv_used, None, out)
    write_json_report(out / "eval.json", payload, manifest.digest)
    _info(f"wrote {out / 'eval.json'} (mAP50 {payload['map50']:.4f})")
    return 0


def _parse_mix(text: str) -> tuple[tuple[str, float], ...]:
    mix = []
    for part in text.split(","):
        name, _, weight = part.partition(":")
        try:
            mix.append((name.strip(), float(weight)))
        except ValueError:
            raise ConfigError(
                f"cannot parse --mix entry {part!r}; expected GCODE:share"
            ) from None
    return tuple(mix)


def cmd_synth(args, argv_used) -> int:
    config = _resolve_config(args)
    synth_config = SynthConfig(
        n_instances=args.n,
        alpha_true=args.alpha,
        area_min=args.area_min,
        area_max=args.area_max,
        gsd=config.gsd,
        scene_width_px=args.scene_width,
        scene_height_px=args.scene_height,
        seed=args.seed,
        category_mix=_parse_mix(args.mix),
    )
    scene = generate_scene(synth_config)

    out = _out_dir(args)
    manifest = _emit_manifest(args, argv_used, config, out)
    (out / "synth_annotations.json").write_text(to_polygon_json(scene.records, config.gsd))
    write_json_report(out / "synth_truth.json", scene.manifest, manifest.digest)

    if args.dropout is not None or args.confidence_jitter is not None:
        detections = list(scene.records)
        if args.dropout is not None:
            detections = apply_dropout(detections, args.dropout, SplitMix64(args.seed + 1))
        detections = assign_confidences(
            detections, SplitMix64(args.seed + 2), args.confidence_jitter or 0.0
        )
        (out / "synth_detections.json").write_text(to_polygon_json(detections, config.gsd))
        _info(f"wrote {out / 'synth_detections.json'} ({len(detections)} detections)")

    _info(f"wrote {out / 'synth_annotations.json'} ({len(scene.records)} instances)")
    return 0


def cmd_tiles(args, argv_used) -> int:
    values = _config_file_values(args)
    tile_size = int(values.get("tile_size", 512))
    grid = TileGrid(args.width, args.height, tile_size)

    out = _out_dir(args)
    manifest = build_manifest(
        argv_used,
        {"tile_size": tile_size, "width_px": args.width, "height_px": args.height},
        _survey_inputs(args),
    )
    write_manifest(manifest, out)
    rows = [
        (t.row, t.col, t.origin_x_px, t.origin_y_px, t.width_px, t.height_px)
        for t in grid.tiles()
    ]
    write_csv_report(out / "tiles.csv", _TILES_HEADER, rows, manifest.digest)

    if args.annotations:
        if not args.globalized:
            raise ConfigError("--annotations requires --globalized OUT")
        parse = _read_annotations(args.annotations, args.schema)
        for rec in parse.records:
            if rec.tile is None:
                raise TileError(
                    f"instance {rec.id} has no tile index; cannot globalize"
                )
        globalized = [to_global(rec, grid) for rec in parse.records]
        target = out / args.globalized
        target.write_text(to_polygon_json(globalized, parse.gsd))
        _info(f"wrote {target} ({len(globalized)} instances)")

    _info(f"wrote {out / 'tiles.csv'} ({len(rows)} tiles)")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gsd", type=float, default=None, help="ground sampling distance, m/px")
    common.add_argument("--config", default=None, help="key=value config file")
    common.add_argument("--out-dir", default=".", help="directory for reports (default: .)")
    common.add_argument("--seed", type=int, default=0, help="random seed (synth only)")

    parser = argparse.ArgumentParser(
        prog="littermetrics",
        description="Beach-litter survey metrics from instance segmentation annotations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def schema_flag(p):
        p.add_argument(
            "--schema",
            choices=[s.value for s in AnnotationSchema],
            default=None,
            help="annotation schema (default: inferred from the file suffix)",
        )

    p = sub.add_parser("areas", parents=[common], help="per-instance pixel and physical areas")
    p.add_argument("--annotations", required=True)
    p.add_argument("--taxonomy", default=None, help="taxonomy CSV (default: bundled)")
    schema_flag(p)
    p.set_defaults(func=cmd_areas)

    p = sub.add_parser("npd", parents=[common], help="size spectrum and power-law fits")
    p.add_argument("--annotations", default=None)
    p.add_argument("--areas-csv", default=None, help="reuse an areas.csv report as input")
    p.add_argument("--taxonomy", default=None)
    p.add_argument("--zone", choices=["intertidal", "backshore", "all"], default="all")
    schema_flag(p)
    p.set_defaults(func=cmd_npd)

    p = sub.add_parser("risk", parents=[common], help="sector CCI/ERI and centroid shift")
    p.add_argument("--annotations", required=True)
    p.add_argument("--taxonomy", default=None)
    p.add_argument(
        "--axis-angle",
        type=float,
        default=0.0,
        help="alongshore axis angle in degrees from the y axis (default: 0)",
    )
    schema_flag(p)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("sourcesink", parents=[common], help="source-group composition")
    p.add_argument("--annotations", required=True)
    p.add_argument("--taxonomy", default=None)
    schema_flag(p)
    p.set_defaults(func=cmd_sourcesink)

    p = sub.add_parser("eval", parents=[common], help="detection metrics against ground truth")
    p.add_argument("--detections", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--iou", type=float, default=DEFAULT_IOU_THRESHOLD)
    p.add_argument(
        "--confidence-cut",
        type=float,
        default=None,
        help="also report precision/recall for detections at or above this confidence",
    )
    schema_flag(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic survey")
    p.add_argument("--n", type=int, required=True, help="number of instances")
    p.add_argument("--alpha", type=float, required=True, help="power-law exponent")
    p.add_argument("--area-min", type=float, default=6.25e-4)
    p.add_argument("--area-max", type=float, default=10.0)
    p.add_argument("--scene-width", type=int, default=20000)
    p.add_argument("--scene-height", type=int, default=20000)
    p.add_argument("--mix", default="G76:1.0", help='category mix, e.g. "G76:0.6,G4:0.4"')
    p.add_argument("--dropout", type=float, default=None, help="detection dropout rate")
    p.add_argument("--confidence-jitter", type=float, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tiles", parents=[common], help="tile grid and coordinate globalization")
    p.add_argument("--width", type=int, required=True, help="orthomosaic width, px")
    p.add_argument("--height", type=int, required=True, help="orthomosaic height, px")
    p.add_argument("--annotations", default=None, help="tile-local annotations to globalize")
    p.add_argument("--globalized", default=None, help="output file for globalized annotations")
    schema_flag(p)
    p.set_defaults(func=cmd_tiles)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv_used = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv_used)
    try:
        return args.func(args, ["littermetrics", *argv_used])
    except LitterMetricsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
