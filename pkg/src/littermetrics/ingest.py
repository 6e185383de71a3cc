"""Annotation ingest: category taxonomy, instance records, survey configuration.

Two input schemas are supported and fully round-trippable:

* ``PolygonJson`` — ``{"gsd_m_per_px": <real>, "shapes": [{"id"?: int,
  "label": "G<code>", "points": [[x, y], ...], "confidence"?: real,
  "zone"?: "intertidal"|"backshore", "tile"?: [row, col]}, ...]}``.
  Unknown fields are ignored.
* ``FlatCsv`` — header ``id,gcode,zone,confidence,points`` with the points
  cell holding ``"x1,y1;x2,y2;..."``. The tile index has no CSV column.

Taxonomy tables are CSV with header ``gcode,description,group,weight``;
``#`` lines are comments. A default table covering the thirteen standard
G-code categories ships with the package.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .errors import AnnotationError, ConfigError, TaxonomyError

_GCODE_RE = re.compile(r"^G\d+$")

# Ordinal-threat rank bands mapped onto the 1..10 hazard-weight scale.
# Fractional ranks are rounded to the nearest integer (half up) before lookup.
_RANK_BANDS: tuple[tuple[int, tuple[int, int]], ...] = (
    (4, (9, 10)),
    (8, (7, 8)),
    (12, (5, 6)),
    (16, (3, 4)),
    (20, (1, 2)),
)


class SourceGroup(str, enum.Enum):
    """Functional origin of a litter category."""

    DOMESTIC = "Domestic"
    FISHING = "Fishing"
    FRAGMENTS = "Fragments"


# Long-form group labels accepted in taxonomy CSVs (normalised lowercase).
_GROUP_ALIASES = {
    "domestic": SourceGroup.DOMESTIC,
    "domestic items": SourceGroup.DOMESTIC,
    "fishing": SourceGroup.FISHING,
    "fishing gear": SourceGroup.FISHING,
    "fragments": SourceGroup.FRAGMENTS,
}


class Zone(str, enum.Enum):
    """Cross-shore zone label. Always supplied by the input, never inferred."""

    INTERTIDAL = "intertidal"
    BACKSHORE = "backshore"


def gcode_number(gcode: str) -> int:
    """Numeric part of a G-code, for deterministic category ordering."""
    if not _GCODE_RE.match(gcode):
        raise TaxonomyError(f"invalid gcode {gcode!r}: expected 'G<digits>'")
    return int(gcode[1:])


@dataclass(frozen=True)
class TaxonomyEntry:
    gcode: str
    description: str
    group: SourceGroup
    hazard_weight: int

    def __post_init__(self) -> None:
        gcode_number(self.gcode)
        if not 1 <= self.hazard_weight <= 10:
            raise TaxonomyError(
                f"hazard weight {self.hazard_weight} for {self.gcode} outside [1, 10]"
            )


class Taxonomy:
    """Immutable lookup table from gcode to :class:`TaxonomyEntry`."""

    def __init__(self, entries: Iterable[TaxonomyEntry]) -> None:
        table: dict[str, TaxonomyEntry] = {}
        for entry in entries:
            if entry.gcode in table:
                raise TaxonomyError(f"duplicate gcode {entry.gcode}")
            table[entry.gcode] = entry
        self._table = dict(sorted(table.items(), key=lambda kv: gcode_number(kv[0])))

    def entry(self, gcode: str) -> TaxonomyEntry:
        try:
            return self._table[gcode]
        except KeyError:
            raise TaxonomyError(f"unknown category {gcode}") from None

    def weight(self, gcode: str) -> int:
        return self.entry(gcode).hazard_weight

    def group(self, gcode: str) -> SourceGroup:
        return self.entry(gcode).group

    def gcodes(self) -> tuple[str, ...]:
        return tuple(self._table)

    def __contains__(self, gcode: object) -> bool:
        return gcode in self._table

    def __len__(self) -> int:
        return len(self._table)

    def __iter__(self):
        return iter(self._table.values())


@dataclass(frozen=True)
class InstanceRecord:
    """One annotated litter instance (polygon in pixel coordinates)."""

    id: int
    gcode: str
    polygon: tuple[tuple[float, float], ...]
    confidence: float | None = None
    zone: Zone | None = None
    tile: tuple[int, int] | None = None  # (row, col)

    def bbox_extent(self) -> tuple[float, float]:
        """Width and height of the vertex bounding box, in pixels."""
        xs = [p[0] for p in self.polygon]
        ys = [p[1] for p in self.polygon]
        return max(xs) - min(xs), max(ys) - min(ys)


@dataclass(frozen=True)
class SurveyConfig:
    """Survey-wide parameters. ``gsd`` (meters/pixel) is always required."""

    gsd: float
    tile_size: int = 512
    bin_min: float = 1e-4
    bin_max: float = 1e1
    bin_count: int = 14
    macro_meso_threshold: float = 6.25e-4
    sector_count: int = 10

    def __post_init__(self) -> None:
        if not (isinstance(self.gsd, (int, float)) and math.isfinite(self.gsd) and self.gsd > 0):
            raise ConfigError(f"gsd must be a positive real, got {self.gsd!r}")
        if self.tile_size < 1:
            raise ConfigError(f"tile_size must be >= 1, got {self.tile_size}")
        if not 0 < self.bin_min < self.bin_max:
            raise ConfigError(
                f"bin bounds must satisfy 0 < bin_min < bin_max, got ({self.bin_min}, {self.bin_max})"
            )
        if self.bin_count < 2:
            raise ConfigError(f"bin_count must be >= 2, got {self.bin_count}")
        if not self.bin_min < self.macro_meso_threshold < self.bin_max:
            raise ConfigError(
                "macro_meso_threshold must lie strictly inside (bin_min, bin_max), "
                f"got {self.macro_meso_threshold}"
            )
        if self.sector_count < 1:
            raise ConfigError(f"sector_count must be >= 1, got {self.sector_count}")


_CONFIG_FIELD_TYPES = {
    "gsd": float,
    "tile_size": int,
    "bin_min": float,
    "bin_max": float,
    "bin_count": int,
    "macro_meso_threshold": float,
    "sector_count": int,
}


def parse_config_text(text: str) -> dict[str, float | int]:
    """Parse a flat ``key=value`` config document into SurveyConfig kwargs.

    Blank lines and ``#`` comments are allowed. Unknown keys are fatal.
    """
    values: dict[str, float | int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_FIELD_TYPES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_FIELD_TYPES[key](value)
        except ValueError:
            raise ConfigError(
                f"config line {lineno}: cannot parse {value!r} as {_CONFIG_FIELD_TYPES[key].__name__}"
            ) from None
    return values


# ---------------------------------------------------------------------------
# taxonomy loading
# ---------------------------------------------------------------------------

_TAXONOMY_HEADER = ["gcode", "description", "group", "weight"]


def load_taxonomy(text: str) -> Taxonomy:
    """Load a taxonomy from CSV text (header ``gcode,description,group,weight``)."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise TaxonomyError("empty taxonomy table") from None
    if [h.strip() for h in header] != _TAXONOMY_HEADER:
        raise TaxonomyError(
            f"taxonomy header must be {','.join(_TAXONOMY_HEADER)!r}, got {','.join(header)!r}"
        )
    entries = []
    for row in reader:
        if len(row) != 4:
            raise TaxonomyError(f"taxonomy row {row!r} does not have 4 columns")
        gcode, description, group_name, weight_text = (cell.strip() for cell in row)
        group = _GROUP_ALIASES.get(group_name.lower())
        if group is None:
            raise TaxonomyError(f"unknown group name {group_name!r} for {gcode}")
        try:
            weight = int(weight_text)
        except ValueError:
            raise TaxonomyError(f"weight {weight_text!r} for {gcode} is not an integer") from None
        entries.append(TaxonomyEntry(gcode, description, group, weight))
    return Taxonomy(entries)


def default_taxonomy() -> Taxonomy:
    """The bundled thirteen-category default taxonomy."""
    text = resources.files("littermetrics").joinpath("data/default_taxonomy.csv").read_text()
    return load_taxonomy(text)


def rank_to_weight(rank: float) -> tuple[int, int]:
    """Map an ordinal threat rank (1..20) to its two-value hazard-weight band.

    Fractional ranks are rounded to the nearest integer (half up) before the
    band lookup, so rank 5.7 lands in the 5-8 band (7, 8) and rank 16.3 in the
    13-16 band (3, 4). Choosing a single weight inside the band is left to the
    caller; the bundled taxonomy hard-codes its chosen values.
    """
    if not (1.0 <= rank <= 20.0):
        raise TaxonomyError(f"rank {rank} outside [1, 20]")
    rounded = min(20, int(math.floor(rank + 0.5)))
    for upper, band in _RANK_BANDS:
        if rounded <= upper:
            return band
    raise AssertionError("unreachable: rank bands cover 1..20")


# ---------------------------------------------------------------------------
# annotation parsing
# ---------------------------------------------------------------------------


class AnnotationSchema(str, enum.Enum):
    POLYGON_JSON = "polygonjson"
    FLAT_CSV = "flatcsv"


@dataclass(frozen=True)
class RecordIssue:
    """A non-fatal problem with one shape/row; parsing continued past it."""

    location: str
    message: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"{self.location}: {self.message}"


@dataclass
class ParseResult:
    records: list[InstanceRecord]
    issues: list[RecordIssue] = field(default_factory=list)
    gsd: float | None = None  # from the PolygonJson header, if present


def parse_annotations(text: str, schema: AnnotationSchema) -> ParseResult:
    """Parse an annotation document.

    Structural problems confined to one shape (too few vertices, bad zone
    label, out-of-range confidence, malformed points) are collected as
    :class:`RecordIssue` and parsing continues. A malformed document or
    duplicate explicit ids raise :class:`AnnotationError`.
    """
    if schema is AnnotationSchema.POLYGON_JSON:
        return _parse_polygon_json(text)
    if schema is AnnotationSchema.FLAT_CSV:
        return _parse_flat_csv(text)
    raise AnnotationError(f"unknown schema {schema!r}")


def _check_shape_fields(
    label: object,
    points: object,
    confidence: object,
    zone: object,
    tile: object,
) -> tuple[str, tuple[tuple[float, float], ...], float | None, Zone | None, tuple[int, int] | None]:
    """Validate one shape's fields; raises ValueError with a reason on problems."""
    if not isinstance(label, str) or not _GCODE_RE.match(label):
        raise ValueError(f"label {label!r} is not a G-code")
    if not isinstance(points, (list, tuple)):
        raise ValueError("points is not a list")
    vertices: list[tuple[float, float]] = []
    for pt in points:
        if not isinstance(pt, (list, tuple)) or len(pt) != 2:
            raise ValueError(f"point {pt!r} is not an [x, y] pair")
        x, y = pt
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in (x, y)):
            raise ValueError(f"point {pt!r} has non-finite coordinates")
        vertices.append((float(x), float(y)))
    if len(vertices) < 3:
        raise ValueError(f"polygon has {len(vertices)} vertices, need at least 3")
    conf: float | None = None
    if confidence is not None:
        if not isinstance(confidence, (int, float)) or not 0.0 <= float(confidence) <= 1.0:
            raise ValueError(f"confidence {confidence!r} outside [0, 1]")
        conf = float(confidence)
    zone_val: Zone | None = None
    if zone is not None:
        try:
            zone_val = Zone(zone)
        except ValueError:
            raise ValueError(f"zone {zone!r} is not one of {[z.value for z in Zone]}") from None
    tile_val: tuple[int, int] | None = None
    if tile is not None:
        if (
            not isinstance(tile, (list, tuple))
            or len(tile) != 2
            or not all(isinstance(v, int) and v >= 0 for v in tile)
        ):
            raise ValueError(f"tile {tile!r} is not a [row, col] pair of non-negative ints")
        tile_val = (int(tile[0]), int(tile[1]))
    return label, tuple(vertices), conf, zone_val, tile_val


def _assign_ids(
    parsed: list[tuple[int | None, str, tuple, float | None, Zone | None, tuple[int, int] | None]],
) -> list[InstanceRecord]:
    explicit = [pid for pid, *_ in parsed if pid is not None]
    seen: set[int] = set()
    for pid in explicit:
        if pid in seen:
            raise AnnotationError(f"duplicate instance id {pid}")
        seen.add(pid)
    next_id = 1
    records: list[InstanceRecord] = []
    for pid, gcode, polygon, conf, zone, tile in parsed:
        if pid is None:
            while next_id in seen:
                next_id += 1
            pid = next_id
            seen.add(pid)
        records.append(InstanceRecord(pid, gcode, polygon, conf, zone, tile))
    return records


def _parse_polygon_json(text: str) -> ParseResult:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("shapes"), list):
        raise AnnotationError("document must be an object with a 'shapes' list")
    gsd = doc.get("gsd_m_per_px")
    if gsd is not None:
        if not isinstance(gsd, (int, float)) or not gsd > 0:
            raise AnnotationError(f"gsd_m_per_px must be a positive real, got {gsd!r}")
        gsd = float(gsd)
    issues: list[RecordIssue] = []
    parsed = []
    for index, shape in enumerate(doc["shapes"]):
        where = f"shape {index}"
        if not isinstance(shape, dict):
            issues.append(RecordIssue(where, "not an object"))
            continue
        shape_id = shape.get("id")
        if shape_id is not None and not isinstance(shape_id, int):
            issues.append(RecordIssue(where, f"id {shape_id!r} is not an integer"))
            continue
        try:
            checked = _check_shape_fields(
                shape.get("label"),
                shape.get("points"),
                shape.get("confidence"),
                shape.get("zone"),
                shape.get("tile"),
            )
        except ValueError as exc:
            issues.append(RecordIssue(where, str(exc)))
            continue
        parsed.append((shape_id, *checked))
    return ParseResult(_assign_ids(parsed), issues, gsd)


_CSV_HEADER = ["id", "gcode", "zone", "confidence", "points"]


def _parse_flat_csv(text: str) -> ParseResult:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise AnnotationError("empty CSV document: missing header") from None
    if [h.strip() for h in header] != _CSV_HEADER:
        raise AnnotationError(
            f"CSV header must be {','.join(_CSV_HEADER)!r}, got {','.join(header)!r}"
        )
    issues: list[RecordIssue] = []
    parsed = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        where = f"line {lineno}"
        if len(row) != 5:
            raise AnnotationError(f"{where}: expected 5 columns, got {len(row)}")
        id_text, gcode, zone_text, conf_text, points_text = (cell.strip() for cell in row)
        row_id: int | None = None
        if id_text:
            try:
                row_id = int(id_text)
            except ValueError:
                issues.append(RecordIssue(where, f"id {id_text!r} is not an integer"))
                continue
        points: list[list[float]] = []
        bad_point = False
        for token in filter(None, (t.strip() for t in points_text.split(";"))):
            parts = token.split(",")
            try:
                if len(parts) != 2:
                    raise ValueError
                points.append([float(parts[0]), float(parts[1])])
            except ValueError:
                issues.append(RecordIssue(where, f"malformed point {token!r}"))
                bad_point = True
                break
        if bad_point:
            continue
        try:
            checked = _check_shape_fields(
                gcode,
                points,
                float(conf_text) if conf_text else None,
                zone_text or None,
                None,
            )
        except ValueError as exc:
            issues.append(RecordIssue(where, str(exc)))
            continue
        parsed.append((row_id, *checked))
    return ParseResult(_assign_ids(parsed), issues, None)


def infer_schema(path: str) -> AnnotationSchema:
    """Guess the annotation schema from a file suffix."""
    lowered = str(path).lower()
    if lowered.endswith(".json"):
        return AnnotationSchema.POLYGON_JSON
    if lowered.endswith(".csv"):
        return AnnotationSchema.FLAT_CSV
    raise AnnotationError(
        f"cannot infer schema from {path!r}; use an explicit --schema of "
        f"{[s.value for s in AnnotationSchema]}"
    )


# ---------------------------------------------------------------------------
# serialization (round-trip)
# ---------------------------------------------------------------------------


def to_polygon_json(records: Sequence[InstanceRecord], gsd: float | None = None) -> str:
    shapes = []
    for rec in records:
        shape: dict[str, object] = {
            "id": rec.id,
            "label": rec.gcode,
            "points": [[x, y] for x, y in rec.polygon],
        }
        if rec.confidence is not None:
            shape["confidence"] = rec.confidence
        if rec.zone is not None:
            shape["zone"] = rec.zone.value
        if rec.tile is not None:
            shape["tile"] = list(rec.tile)
        shapes.append(shape)
    doc: dict[str, object] = {}
    if gsd is not None:
        doc["gsd_m_per_px"] = gsd
    doc["shapes"] = shapes
    return json.dumps(doc, indent=2) + "\n"


def to_flat_csv(records: Sequence[InstanceRecord]) -> str:
    """Serialize to the flat CSV schema. Tile indices have no column and must be absent."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for rec in records:
        if rec.tile is not None:
            raise AnnotationError(f"record {rec.id} carries a tile index; FlatCsv cannot store it")
        points = ";".join(f"{x!r},{y!r}" for x, y in rec.polygon)
        writer.writerow(
            [
                rec.id,
                rec.gcode,
                rec.zone.value if rec.zone is not None else "",
                "" if rec.confidence is None else repr(rec.confidence),
                points,
            ]
        )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

# Minimum polygon extent in pixels: longest bbox side must reach MIN_LONG_SIDE
# and the shortest must reach MIN_SHORT_SIDE (the thin-object allowance).
MIN_LONG_SIDE_PX = 3.0
MIN_SHORT_SIDE_PX = 2.0


@dataclass(frozen=True)
class Rejection:
    record: InstanceRecord
    reason: str


@dataclass
class ValidationResult:
    accepted: list[InstanceRecord]
    rejected: list[Rejection]


def validate_instances(records: Sequence[InstanceRecord], taxonomy: Taxonomy) -> ValidationResult:
    """Split records into accepted instances and reasoned rejections.

    Rejection reasons: ``unknown category`` (gcode not in the taxonomy),
    ``too few vertices`` (< 3), and ``sub-minimum`` extent — the vertex
    bounding box must span at least 3 px on its longest side and at least
    2 px on its shortest (thin elongated objects are traced at a minimum
    2 px width). Idempotent: re-validating accepted records rejects nothing.
    """
    accepted: list[InstanceRecord] = []
    rejected: list[Rejection] = []
    for rec in records:
        if rec.gcode not in taxonomy:
            rejected.append(Rejection(rec, f"unknown category {rec.gcode}"))
            continue
        if len(rec.polygon) < 3:
            rejected.append(Rejection(rec, "too few vertices"))
            continue
        width, height = rec.bbox_extent()
        long_side, short_side = max(width, height), min(width, height)
        if long_side < MIN_LONG_SIDE_PX or short_side < MIN_SHORT_SIDE_PX:
            rejected.append(
                Rejection(rec, f"sub-minimum extent ({width:g} x {height:g} px)")
            )
            continue
        accepted.append(rec)
    return ValidationResult(accepted, rejected)
