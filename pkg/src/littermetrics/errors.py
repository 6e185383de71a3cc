"""Exception hierarchy shared across the package.

Every fatal condition raised by library code derives from
:class:`LitterMetricsError` so the CLI can translate any of them into a
nonzero exit with a one-line message.
"""

from __future__ import annotations


class LitterMetricsError(Exception):
    """Base class for all errors raised by this package."""


class AnnotationError(LitterMetricsError):
    """Malformed annotation document or fatal record problem (e.g. duplicate ids)."""


class TaxonomyError(LitterMetricsError):
    """Invalid taxonomy table or lookup of an unknown category."""


class ConfigError(LitterMetricsError):
    """Invalid survey configuration value or config-file syntax."""


class GeometryError(LitterMetricsError):
    """Degenerate or self-intersecting polygon, empty rasterization, bad gsd."""


class FitError(LitterMetricsError):
    """Size-distribution fit cannot be computed (insufficient or degenerate bins)."""


class RiskError(LitterMetricsError):
    """Sector partition or index computation is undefined for the input."""


class SourceSinkError(LitterMetricsError):
    """Group composition undefined (empty survey, zero-count quotient)."""


class EvalError(LitterMetricsError):
    """Detection scoring undefined (missing confidences, no ground truth)."""


class TileError(LitterMetricsError):
    """Tile index outside the grid or invalid grid dimensions."""


class SynthError(LitterMetricsError):
    """Invalid synthesis configuration or failed scene placement."""
