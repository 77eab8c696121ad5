"""Fit-on-train preprocessing: column drops, derived columns, standardization, one-hot."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .matrix import FeatureMatrix, LabelVector
from .table import RawRecordTable, SchemaError

LABEL_MODES = ("binary", "multiclass")
ATTACK_CLASS_NAME = "attack"


def load_derived_map(path) -> dict[str, str]:
    """Two-column text file (key, value separated by whitespace), '#' comments allowed."""
    mapping = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split(None, 1)
            if len(parts) != 2:
                raise SchemaError(f"{path}:{lineno}: expected 'key value', got {stripped!r}")
            mapping[parts[0]] = parts[1].strip()
    return mapping


def default_map_path(name: str) -> Path:
    """Path of a derived-map file shipped with the package."""
    return Path(__file__).parent / "maps" / name


@dataclass(frozen=True)
class PreprocessConfig:
    """What to drop, how to encode the label, and where the offline derived maps live."""

    drop_columns: tuple[str, ...] = ()
    label_mode: str = "binary"
    benign_label: str = "Benign"
    port_map_path: str | None = None
    prefix_map_path: str | None = None
    derive_protocol_from: str | None = None  # column holding a destination port
    derive_region_from: str | None = None  # column holding a destination IP

    def __post_init__(self):
        if self.label_mode not in LABEL_MODES:
            raise ValueError(f"label_mode must be one of {LABEL_MODES}")


PROTOCOL_COLUMN = "app_protocol"
REGION_COLUMN = "dst_region"
UNKNOWN_PROTOCOL = "other"
UNKNOWN_REGION = "unknown"


def _protocol_of(port_value, port_map: dict[str, str]) -> str:
    key = str(port_value)
    if key.endswith(".0"):  # ports read through a numeric column
        key = key[:-2]
    return port_map.get(key, UNKNOWN_PROTOCOL)


def _region_of(ip_value, prefix_map: dict[str, str]) -> str:
    """Longest matching string prefix wins."""
    ip = str(ip_value)
    best = None
    for prefix in prefix_map:
        if ip.startswith(prefix) and (best is None or len(prefix) > len(best)):
            best = prefix
    return prefix_map[best] if best is not None else UNKNOWN_REGION


@dataclass
class PreprocessorState:
    """Everything fitted on the training split that transform time needs."""

    dropped_columns: list[str]
    numeric_stats: dict[str, tuple[float, float]]  # column -> (mean, population std)
    category_vocab: dict[str, list[str]]
    label_map: dict[str, int]
    class_names: list[str]
    label_column: str
    numeric_order: list[str]
    categorical_order: list[str]
    label_mode: str
    benign_label: str
    port_map: dict[str, str] = field(default_factory=dict)
    prefix_map: dict[str, str] = field(default_factory=dict)
    derive_protocol_from: str | None = None
    derive_region_from: str | None = None

    @property
    def feature_names(self) -> tuple[str, ...]:
        names = list(self.numeric_order)
        for col in self.categorical_order:
            names.extend(f"{col}={cat}" for cat in self.category_vocab[col])
        return tuple(names)

    def to_json(self) -> str:
        payload = {
            "dropped_columns": self.dropped_columns,
            "numeric_stats": {k: list(v) for k, v in self.numeric_stats.items()},
            "category_vocab": self.category_vocab,
            "label_map": self.label_map,
            "class_names": self.class_names,
            "label_column": self.label_column,
            "numeric_order": self.numeric_order,
            "categorical_order": self.categorical_order,
            "label_mode": self.label_mode,
            "benign_label": self.benign_label,
            "port_map": self.port_map,
            "prefix_map": self.prefix_map,
            "derive_protocol_from": self.derive_protocol_from,
            "derive_region_from": self.derive_region_from,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PreprocessorState":
        raw = json.loads(text)
        raw["numeric_stats"] = {k: (v[0], v[1]) for k, v in raw["numeric_stats"].items()}
        return cls(**raw)


def _derived_cells(table: RawRecordTable, config_or_state) -> dict[str, list[str]]:
    """Compute derived categorical columns for every row of ``table``."""
    out = {}
    src = config_or_state
    if src.derive_protocol_from:
        values = table.column_values(src.derive_protocol_from)
        out[PROTOCOL_COLUMN] = [_protocol_of(v, src.port_map) for v in values]
    if src.derive_region_from:
        values = table.column_values(src.derive_region_from)
        out[REGION_COLUMN] = [_region_of(v, src.prefix_map) for v in values]
    return out


class _ConfigWithMaps:
    """Config plus the loaded derived maps, shaped like state for _derived_cells."""

    def __init__(self, config: PreprocessConfig):
        self.derive_protocol_from = config.derive_protocol_from
        self.derive_region_from = config.derive_region_from
        self.port_map = (
            load_derived_map(config.port_map_path)
            if config.port_map_path
            else load_derived_map(default_map_path("port_protocol.map"))
            if config.derive_protocol_from
            else {}
        )
        self.prefix_map = (
            load_derived_map(config.prefix_map_path)
            if config.prefix_map_path
            else load_derived_map(default_map_path("ip_prefix_region.map"))
            if config.derive_region_from
            else {}
        )


def fit_preprocessor(train: RawRecordTable, config: PreprocessConfig) -> PreprocessorState:
    """Fit means/stds, vocabularies, and the label map from the training split only.

    Zero-variance numeric columns are dropped. Columns consumed by a derived
    map are dropped in favor of the derived categorical.
    """
    if train.row_count == 0:
        raise ValueError("cannot fit a preprocessor on an empty table")

    loaded = _ConfigWithMaps(config)
    dropped = list(config.drop_columns)
    for src in (config.derive_protocol_from, config.derive_region_from):
        if src and src not in dropped:
            dropped.append(src)

    numeric_order: list[str] = []
    categorical_order: list[str] = []
    numeric_stats: dict[str, tuple[float, float]] = {}
    category_vocab: dict[str, list[str]] = {}

    for col in train.columns:
        if col.name in dropped or col.kind == "label":
            continue
        values = train.column_values(col.name)
        if col.kind == "numeric":
            arr = np.asarray(values, dtype=np.float64)
            mean = float(arr.mean())
            std = float(arr.std())  # population std
            if std == 0.0:
                dropped.append(col.name)
                continue
            numeric_order.append(col.name)
            numeric_stats[col.name] = (mean, std)
        else:
            categorical_order.append(col.name)
            category_vocab[col.name] = sorted(set(values))

    derived = _derived_cells(train, loaded)
    for name, cells in derived.items():
        categorical_order.append(name)
        category_vocab[name] = sorted(set(cells))

    if not numeric_order and not categorical_order:
        raise ValueError("all feature columns were dropped")

    labels = train.column_values(train.label_column)
    if config.label_mode == "binary":
        label_map = {config.benign_label: 0, ATTACK_CLASS_NAME: 1}
        class_names = [config.benign_label, ATTACK_CLASS_NAME]
    else:
        classes = sorted(set(labels))
        label_map = {name: i for i, name in enumerate(classes)}
        class_names = classes

    return PreprocessorState(
        dropped_columns=dropped,
        numeric_stats=numeric_stats,
        category_vocab=category_vocab,
        label_map=label_map,
        class_names=class_names,
        label_column=train.label_column,
        numeric_order=numeric_order,
        categorical_order=categorical_order,
        label_mode=config.label_mode,
        benign_label=config.benign_label,
        port_map=loaded.port_map,
        prefix_map=loaded.prefix_map,
        derive_protocol_from=config.derive_protocol_from,
        derive_region_from=config.derive_region_from,
    )


def apply_preprocessor(
    table: RawRecordTable, state: PreprocessorState
) -> tuple[FeatureMatrix, LabelVector]:
    """Standardize numerics, one-hot categoricals, and encode the label column.

    Output column order: numeric columns in input order, then one categorical
    block per column with cells in vocabulary order. Categories unseen at fit
    time encode as all-zero blocks.
    """
    n = table.row_count
    if n == 0:
        raise ValueError("empty table")

    blocks = []
    for col in state.numeric_order:
        mean, std = state.numeric_stats[col]
        arr = np.asarray(table.column_values(col), dtype=np.float64)
        blocks.append(((arr - mean) / std)[:, None])

    derived = _derived_cells(table, state)
    for col in state.categorical_order:
        vocab = state.category_vocab[col]
        cells = derived[col] if col in derived else table.column_values(col)
        onehot = np.zeros((n, len(vocab)), dtype=np.float64)
        pos = {cat: j for j, cat in enumerate(vocab)}
        for i, cell in enumerate(cells):
            j = pos.get(str(cell))
            if j is not None:
                onehot[i, j] = 1.0
        blocks.append(onehot)

    values = np.hstack(blocks) if blocks else np.zeros((n, 0))
    x = FeatureMatrix(state.feature_names, values)

    raw_labels = table.column_values(table.label_column)
    if state.label_mode == "binary":
        ids = np.asarray([0 if lab == state.benign_label else 1 for lab in raw_labels])
    else:
        try:
            ids = np.asarray([state.label_map[lab] for lab in raw_labels])
        except KeyError as exc:
            raise ValueError(f"unknown label class at transform time: {exc.args[0]!r}") from None
    y = LabelVector(ids, k=len(state.class_names), class_names=tuple(state.class_names))
    return x, y
