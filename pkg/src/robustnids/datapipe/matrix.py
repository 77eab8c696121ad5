"""Dense feature matrices and label vectors, the data carriers shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FeatureMatrix:
    """Named, dense sample x feature table of float64 values."""

    feature_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        if self.values.shape[1] != len(self.feature_names):
            raise ValueError(
                f"{len(self.feature_names)} feature names for {self.values.shape[1]} columns"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def take(self, rows) -> "FeatureMatrix":
        """Row subset (copy)."""
        return FeatureMatrix(self.feature_names, self.values[np.asarray(rows)])

    def select(self, names) -> "FeatureMatrix":
        """Column subset in the given name order."""
        index = {n: i for i, n in enumerate(self.feature_names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise KeyError(f"unknown feature(s): {missing}")
        cols = [index[n] for n in names]
        return FeatureMatrix(tuple(names), self.values[:, cols])


@dataclass
class LabelVector:
    """Integer class ids in 0..k-1 with their class names."""

    ids: np.ndarray
    k: int
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if self.ids.ndim != 1:
            raise ValueError("ids must be 1-D")
        if self.k < 2:
            raise ValueError("need at least 2 classes")
        if self.ids.size and (self.ids.min() < 0 or self.ids.max() >= self.k):
            raise ValueError(f"ids must lie in 0..{self.k - 1}")
        if not self.class_names:
            self.class_names = tuple(f"class{i}" for i in range(self.k))
        self.class_names = tuple(self.class_names)
        if len(self.class_names) != self.k:
            raise ValueError("class_names length must equal k")

    @property
    def n_samples(self) -> int:
        return self.ids.size

    def take(self, rows) -> "LabelVector":
        return LabelVector(self.ids[np.asarray(rows)], self.k, self.class_names)

    def counts(self) -> np.ndarray:
        return np.bincount(self.ids, minlength=self.k)
