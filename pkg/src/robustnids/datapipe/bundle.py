"""Seeded stratified train/test bundles with optional class balancing."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matrix import FeatureMatrix, LabelVector


@dataclass
class DatasetBundle:
    train_x: FeatureMatrix
    test_x: FeatureMatrix
    train_y: LabelVector
    test_y: LabelVector
    feature_subset_size: int
    seed: int

    def __post_init__(self):
        if self.train_x.feature_names != self.test_x.feature_names:
            raise ValueError("train and test must share feature names")
        if self.train_x.n_samples != self.train_y.n_samples:
            raise ValueError("train_x/train_y row mismatch")
        if self.test_x.n_samples != self.test_y.n_samples:
            raise ValueError("test_x/test_y row mismatch")

    @property
    def n_features(self) -> int:
        return self.train_x.n_features


def make_bundle(
    x: FeatureMatrix,
    y: LabelVector,
    split_fraction: float,
    undersample: bool,
    seed: int,
) -> DatasetBundle:
    """Stratified split, then (optionally) downsample every training class
    to the smallest training class count. The test split is never touched.
    """
    if x.n_samples != y.n_samples:
        raise ValueError("x and y must be paired")
    if not 0.0 < split_fraction < 1.0:
        raise ValueError("split_fraction must lie in (0, 1)")

    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for c in range(y.k):
        idx = np.flatnonzero(y.ids == c)
        if idx.size == 0:
            continue
        idx = rng.permutation(idx)
        n_train = int(round(split_fraction * idx.size))
        if n_train < 1 or idx.size - n_train < 1:
            raise ValueError(
                f"class {c} would be absent from a split at fraction {split_fraction}"
            )
        train_parts.append(idx[:n_train])
        test_parts.append(idx[n_train:])

    train_idx = np.concatenate(train_parts)
    if undersample:
        train_labels = y.ids[train_idx]
        counts = [np.sum(train_labels == c) for c in np.unique(train_labels)]
        floor = min(counts)
        kept = []
        for c in np.unique(train_labels):
            members = train_idx[train_labels == c]
            kept.append(rng.choice(members, size=floor, replace=False))
        train_idx = np.concatenate(kept)
    train_idx = np.sort(train_idx)
    test_idx = np.sort(np.concatenate(test_parts))

    return DatasetBundle(
        train_x=x.take(train_idx),
        test_x=x.take(test_idx),
        train_y=y.take(train_idx),
        test_y=y.take(test_idx),
        feature_subset_size=x.n_features,
        seed=seed,
    )


def save_bundle(bundle: DatasetBundle, path) -> None:
    # write through a handle so numpy never appends its own .npz suffix
    with Path(path).open("wb") as fh:
        np.savez(
            fh,
            feature_names=np.asarray(bundle.train_x.feature_names),
            class_names=np.asarray(bundle.train_y.class_names),
            train_x=bundle.train_x.values,
            test_x=bundle.test_x.values,
            train_y=bundle.train_y.ids,
            test_y=bundle.test_y.ids,
            k=bundle.train_y.k,
            feature_subset_size=bundle.feature_subset_size,
            seed=bundle.seed,
        )


def load_bundle(path) -> DatasetBundle:
    with np.load(Path(path), allow_pickle=False) as data:
        names = tuple(str(n) for n in data["feature_names"])
        classes = tuple(str(n) for n in data["class_names"])
        k = int(data["k"])
        return DatasetBundle(
            train_x=FeatureMatrix(names, data["train_x"]),
            test_x=FeatureMatrix(names, data["test_x"]),
            train_y=LabelVector(data["train_y"], k, classes),
            test_y=LabelVector(data["test_y"], k, classes),
            feature_subset_size=int(data["feature_subset_size"]),
            seed=int(data["seed"]),
        )


def save_corpus(x: FeatureMatrix, y: LabelVector, path) -> None:
    """Persist a full (unsplit) encoded corpus."""
    with Path(path).open("wb") as fh:
        np.savez(
            fh,
            feature_names=np.asarray(x.feature_names),
            class_names=np.asarray(y.class_names),
            values=x.values,
            ids=y.ids,
            k=y.k,
        )


def load_corpus(path) -> tuple[FeatureMatrix, LabelVector]:
    with np.load(Path(path), allow_pickle=False) as data:
        names = tuple(str(n) for n in data["feature_names"])
        classes = tuple(str(n) for n in data["class_names"])
        x = FeatureMatrix(names, data["values"])
        y = LabelVector(data["ids"], int(data["k"]), classes)
    return x, y
