"""Clean-performance, robustness, and aggregate statistics."""

from .aggregate import AggregateStat, aggregate, write_aggregate_csv
from .classification import CleanMetrics, clean_metrics
from .robustness import AsrUndefined, RobustnessMetrics, asr, confidence_drop, robustness_metrics

__all__ = [
    "AggregateStat",
    "AsrUndefined",
    "CleanMetrics",
    "RobustnessMetrics",
    "aggregate",
    "asr",
    "clean_metrics",
    "confidence_drop",
    "robustness_metrics",
    "write_aggregate_csv",
]
