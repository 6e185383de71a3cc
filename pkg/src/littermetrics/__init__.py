"""Beach-litter survey metrics from instance-segmentation masks.

Converts polygon annotations into physical coverage areas, fragmentation
size spectra with power-law fits, alongshore risk indices, source-group
composition, and detection-quality scores — as a library and as the
``littermetrics`` command-line tool.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    AnnotationError,
    ConfigError,
    EvalError,
    FitError,
    GeometryError,
    LitterMetricsError,
    RiskError,
    SourceSinkError,
    SynthError,
    TaxonomyError,
    TileError,
)
from .ingest import (
    AnnotationSchema,
    InstanceRecord,
    SourceGroup,
    SurveyConfig,
    Taxonomy,
    TaxonomyEntry,
    Zone,
    default_taxonomy,
    load_taxonomy,
    parse_annotations,
    rank_to_weight,
    validate_instances,
)
from .geometry import (
    InstanceMeasurement,
    PhysicalArea,
    PixelFootprint,
    ProjectedCentroid,
    coverage_runs,
    instance_centroid,
    measure_polygon,
    physical_area,
    rasterize,
    shoelace_area,
)
from .fragmentation import (
    BinEdges,
    PowerLawFit,
    Segment,
    SizeBin,
    bin_areas,
    build_bins,
    fit_power_law,
    t_cdf,
)
from .risk import (
    CentroidShift,
    Sector,
    SectorMetrics,
    centroid_shift,
    compute_cci,
    compute_eri,
    minmax_normalize,
    partition_sectors,
    survey_risk,
)
from .sourcesink import GroupComposition, compose, overrepresentation
from .evalmetrics import (
    APResult,
    MatchSet,
    average_precision,
    map50,
    mask_iou,
    match,
    per_category_ap,
    precision_recall,
)
from .tiler import TileGrid, TileIndex, tile_grid, to_global, to_local
from .synth import SplitMix64, SynthConfig, generate_scene, sample_powerlaw

__all__ = [
    "__version__",
    "AnnotationError",
    "AnnotationSchema",
    "APResult",
    "BinEdges",
    "CentroidShift",
    "ConfigError",
    "EvalError",
    "FitError",
    "GeometryError",
    "GroupComposition",
    "InstanceMeasurement",
    "InstanceRecord",
    "LitterMetricsError",
    "MatchSet",
    "PhysicalArea",
    "PixelFootprint",
    "PowerLawFit",
    "ProjectedCentroid",
    "RiskError",
    "Sector",
    "SectorMetrics",
    "Segment",
    "SizeBin",
    "SourceGroup",
    "SourceSinkError",
    "SplitMix64",
    "SurveyConfig",
    "SynthConfig",
    "SynthError",
    "Taxonomy",
    "TaxonomyEntry",
    "TaxonomyError",
    "TileError",
    "TileGrid",
    "TileIndex",
    "Zone",
    "average_precision",
    "bin_areas",
    "build_bins",
    "centroid_shift",
    "compose",
    "compute_cci",
    "compute_eri",
    "coverage_runs",
    "default_taxonomy",
    "fit_power_law",
    "generate_scene",
    "instance_centroid",
    "load_taxonomy",
    "map50",
    "mask_iou",
    "match",
    "measure_polygon",
    "minmax_normalize",
    "overrepresentation",
    "parse_annotations",
    "partition_sectors",
    "per_category_ap",
    "physical_area",
    "precision_recall",
    "rank_to_weight",
    "rasterize",
    "sample_powerlaw",
    "shoelace_area",
    "survey_risk",
    "t_cdf",
    "tile_grid",
    "to_global",
    "to_local",
    "validate_instances",
]
