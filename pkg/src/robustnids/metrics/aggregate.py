"""Grouped means with 95% confidence intervals over sweep result records."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

# Normal-approximation 95% interval; flagged below this group size.
Z_95 = 1.96
SMALL_N = 10


@dataclass
class AggregateStat:
    group: tuple
    mean: float
    ci95_half_width: float
    n: int
    small_n: bool

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.ci95_half_width < 0:
            raise ValueError("half-width must be >= 0")


def aggregate(
    records: Sequence[Mapping],
    group_by: Sequence[str],
    value: str | Callable[[Mapping], float],
) -> list[AggregateStat]:
    """Mean and 1.96*s/sqrt(n) half-width per group, ordered by group key.

    Records whose value is None (failed runs) are skipped. Groups of one get
    half-width 0 and the small-n flag.
    """
    if not records:
        raise ValueError("no records to aggregate")
    group_by = tuple(group_by)
    get_value = value if callable(value) else (lambda r, key=value: r[key])

    groups: dict[tuple, list[float]] = {}
    for rec in records:
        for key in group_by:
            if key not in rec:
                raise KeyError(f"unknown group key {key!r}")
        v = get_value(rec)
        if v is None:
            continue
        groups.setdefault(tuple(rec[k] for k in group_by), []).append(float(v))

    stats = []
    for key in sorted(groups):
        values = np.asarray(groups[key])
        n = values.size
        if n == 1:
            half = 0.0
        else:
            half = Z_95 * values.std(ddof=1) / np.sqrt(n)
        stats.append(
            AggregateStat(
                group=key,
                mean=float(values.mean()),
                ci95_half_width=float(half),
                n=n,
                small_n=n < SMALL_N,
            )
        )
    return stats


def write_aggregate_csv(stats: Sequence[AggregateStat], group_by: Sequence[str], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*group_by, "mean", "ci95", "n"])
        for stat in stats:
            writer.writerow([*stat.group, repr(stat.mean), repr(stat.ci95_half_width), stat.n])
