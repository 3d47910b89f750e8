"""Paradigm alignment of identifier strings and paradigm dependency discovery."""

from .charspace import (
    NULL,
    DistanceTable,
    GlyphSet,
    MetricError,
    default_distance_table,
    diameter,
    load_distance_config,
    validate_metric,
)
from .paradigm import (
    CompactPattern,
    Paradigm,
    compact,
    exact_sap_oracle,
    from_rows,
    from_string,
    merge,
    size_of,
)
from .bounds import BoundInterval, IntervalTable, identify_critical, on_merge_commit, refine, select_pivot
from .engine import (
    MergeTree,
    RunMetrics,
    pairwise_merge_baseline,
    pruning_merge,
    run_engine,
    single_merge,
    verify_local_minimality,
)
from .discovery import Dependency, Record, Thresholds, discover
from .synth import GenConfig, Plant, generate

__version__ = "0.1.0"

__all__ = [
    "NULL", "DistanceTable", "GlyphSet", "MetricError", "default_distance_table", "diameter",
    "load_distance_config", "validate_metric",
    "CompactPattern", "Paradigm", "compact", "exact_sap_oracle", "from_rows", "from_string", "merge", "size_of",
    "BoundInterval", "IntervalTable", "identify_critical", "on_merge_commit", "refine", "select_pivot",
    "MergeTree", "RunMetrics", "pairwise_merge_baseline", "pruning_merge", "run_engine", "single_merge",
    "verify_local_minimality",
    "Dependency", "Record", "Thresholds", "discover",
    "GenConfig", "Plant", "generate",
]
