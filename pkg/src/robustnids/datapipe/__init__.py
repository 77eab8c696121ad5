"""Data ingestion, preprocessing, feature ranking, and dataset bundles."""

from .bundle import DatasetBundle, load_bundle, make_bundle, save_bundle
from .matrix import FeatureMatrix, LabelVector
from .preprocess import (
    PreprocessConfig,
    PreprocessorState,
    apply_preprocessor,
    fit_preprocessor,
    load_derived_map,
)
from .ranking import FeatureRanking, RankedFeature, rank_features, select_top_k, write_ranking_csv
from .synth import SynthSpec, synth_dataset
from .table import ColumnSpec, RawRecordTable, SchemaError, ingest_csv, load_schema

__all__ = [
    "ColumnSpec",
    "DatasetBundle",
    "FeatureMatrix",
    "FeatureRanking",
    "LabelVector",
    "PreprocessConfig",
    "PreprocessorState",
    "RankedFeature",
    "RawRecordTable",
    "SchemaError",
    "SynthSpec",
    "apply_preprocessor",
    "fit_preprocessor",
    "ingest_csv",
    "load_bundle",
    "load_derived_map",
    "load_schema",
    "make_bundle",
    "rank_features",
    "save_bundle",
    "select_top_k",
    "synth_dataset",
    "write_ranking_csv",
]
