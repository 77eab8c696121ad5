"""Experiment grids, execution, persistence, and the defense comparison."""

from .defense import ComparisonRow, DefenseComparison, compare_defenses, default_deep_arms
from .runner import BundleSource, execute, group_cells, run_cell
from .spec import (
    CLEAN_DEFENSE,
    AdvArm,
    RunConfig,
    SweepSpec,
    enumerate_runs,
    stable_seed,
)
from .store import ResultStore, RunResult, StoreIntegrityError, corpus_hash, validate_store

__all__ = [
    "AdvArm",
    "BundleSource",
    "CLEAN_DEFENSE",
    "ComparisonRow",
    "DefenseComparison",
    "ResultStore",
    "RunConfig",
    "RunResult",
    "StoreIntegrityError",
    "SweepSpec",
    "compare_defenses",
    "corpus_hash",
    "default_deep_arms",
    "enumerate_runs",
    "execute",
    "group_cells",
    "run_cell",
    "stable_seed",
    "validate_store",
]
