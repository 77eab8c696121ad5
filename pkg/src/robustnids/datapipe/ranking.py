"""Per-feature one-way ANOVA F ranking and top-k column selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matrix import FeatureMatrix, LabelVector

# Features with zero within-class variance get F = +inf; for importance
# normalization they are weighted at INF_CAP_FACTOR x the largest finite F.
INF_CAP_FACTOR = 10.0


@dataclass(frozen=True)
class RankedFeature:
    name: str
    f_statistic: float
    normalized_importance: float
    cumulative_importance: float


@dataclass
class FeatureRanking:
    entries: list[RankedFeature]
    infinite_cap: float | None = None  # cap applied to +inf F values, if any

    def top_names(self, k: int) -> list[str]:
        return [e.name for e in self.entries[:k]]


def rank_features(x: FeatureMatrix, y: LabelVector) -> FeatureRanking:
    """Rank features by the between/within class variance ratio.

    F = (SSB / (k-1)) / (SSW / (N-k)) per feature, classes weighted by size.
    Zero-within-variance features are sentinel +inf and sort first; a feature
    that is constant overall carries no signal and gets F = 0.
    """
    if x.n_features == 0:
        raise ValueError("no features to rank")
    values, ids = x.values, y.ids
    present = np.unique(ids)
    if present.size < 2:
        raise ValueError("need at least 2 classes present to rank features")
    counts = np.bincount(ids, minlength=y.k)
    if np.any((counts > 0) & (counts < 2)):
        raise ValueError("every present class needs at least 2 samples")

    n = values.shape[0]
    k = present.size
    grand = values.mean(axis=0)
    ssb = np.zeros(x.n_features)
    ssw = np.zeros(x.n_features)
    for c in present:
        group = values[ids == c]
        gmean = group.mean(axis=0)
        ssb += group.shape[0] * (gmean - grand) ** 2
        ssw += ((group - gmean) ** 2).sum(axis=0)

    msb = ssb / (k - 1)
    msw = ssw / (n - k)
    f = np.full(x.n_features, np.inf)
    live = msw > 0
    f[live] = msb[live] / msw[live]
    f[(~live) & (ssb == 0)] = 0.0  # constant feature, no signal

    order = sorted(range(x.n_features), key=lambda j: (-f[j], j))
    f_sorted = f[order]

    finite = np.isfinite(f_sorted)
    cap = None
    weights = f_sorted.copy()
    if not np.all(finite):
        cap = INF_CAP_FACTOR * float(f_sorted[finite].max()) if finite.any() else 1.0
        weights[~finite] = cap
    total = weights.sum()
    if total == 0.0:
        norm = np.full_like(weights, 1.0 / weights.size)
    else:
        norm = weights / total
    cum = np.cumsum(norm)

    entries = [
        RankedFeature(
            name=x.feature_names[j],
            f_statistic=float(f_sorted[i]),
            normalized_importance=float(norm[i]),
            cumulative_importance=float(cum[i]),
        )
        for i, j in enumerate(order)
    ]
    return FeatureRanking(entries=entries, infinite_cap=cap)


def select_top_k(x: FeatureMatrix, ranking: FeatureRanking, k: int) -> FeatureMatrix:
    """Keep the k highest-ranked columns, in ranking order."""
    if not 1 <= k <= x.n_features:
        raise ValueError(f"k={k} out of range 1..{x.n_features}")
    return x.select(ranking.top_names(k))


def write_ranking_csv(ranking: FeatureRanking, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["rank", "feature", "f_statistic", "normalized_importance", "cumulative_importance"]
        )
        for rank, e in enumerate(ranking.entries, start=1):
            writer.writerow(
                [rank, e.name, repr(e.f_statistic), repr(e.normalized_importance), repr(e.cumulative_importance)]
            )


def read_ranking_csv(path) -> FeatureRanking:
    entries = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            entries.append(
                RankedFeature(
                    name=row["feature"],
                    f_statistic=float(row["f_statistic"]),
                    normalized_importance=float(row["normalized_importance"]),
                    cumulative_importance=float(row["cumulative_importance"]),
                )
            )
    return FeatureRanking(entries=entries)
