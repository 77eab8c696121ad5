"""Gradient-sign evasion attacks (FGSM, BIM, PGD) with L-inf projection.

All attacks are untargeted: they climb the true-class loss. Perturbations are
measured in standardized feature units; the optional feature-range clip keeps
adversarial rows inside the training split's per-feature [min, max] box, with
the epsilon ball taking precedence where the two constraints conflict.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..datapipe.bundle import DatasetBundle
from ..datapipe.matrix import FeatureMatrix, LabelVector
from ..neuralnet.gradients import cross_entropy_per_sample, input_gradients
from ..neuralnet.network import DenseNetwork, forward

ATTACK_KINDS = ("fgsm", "bim", "pgd")

# Default iterative schedule: the paper grid fixes the budgets, not the steps.
DEFAULT_ITERATIONS = 10
DEFAULT_ALPHA_FRACTION = 0.25  # alpha = epsilon / 4


@dataclass(frozen=True)
class AttackConfig:
    kind: str
    epsilon: float
    alpha: float | None = None
    iterations: int | None = None
    random_start_radius: float = 0.0
    clip_to_feature_range: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"kind must be one of {ATTACK_KINDS}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.kind in ("bim", "pgd"):
            if self.alpha is None or self.iterations is None:
                raise ValueError(f"{self.kind} needs alpha and iterations")
            if self.iterations < 1:
                raise ValueError("iterations must be >= 1")
            if self.alpha > self.epsilon:
                raise ValueError("alpha must not exceed epsilon")
            if self.alpha <= 0 and self.epsilon > 0:
                raise ValueError("alpha must be > 0")
        if self.random_start_radius < 0:
            raise ValueError("random_start_radius must be >= 0")
        if self.kind == "pgd" and self.random_start_radius > self.epsilon:
            raise ValueError("random_start_radius must not exceed epsilon")

    @classmethod
    def default(cls, kind: str, epsilon: float, seed: int = 0, **overrides) -> "AttackConfig":
        """Config with the documented iterative defaults filled in."""
        if kind == "fgsm":
            return cls(kind=kind, epsilon=epsilon, seed=seed, **overrides)
        fields = {
            "alpha": epsilon * DEFAULT_ALPHA_FRACTION,
            "iterations": DEFAULT_ITERATIONS,
            "random_start_radius": epsilon if kind == "pgd" else 0.0,
        }
        fields.update(overrides)
        return cls(kind=kind, epsilon=epsilon, seed=seed, **fields)

    def reseed(self, seed: int) -> "AttackConfig":
        return dataclasses.replace(self, seed=seed)


@dataclass
class AttackOutcome:
    """Adversarial batch plus bookkeeping for the robustness metrics."""

    x_adv: FeatureMatrix
    perturbation: np.ndarray
    flipped: np.ndarray  # per sample: clean prediction was correct and got flipped
    queries: int  # batch gradient evaluations
    clean_pred: np.ndarray
    adv_pred: np.ndarray
    probs_before: np.ndarray
    probs_after: np.ndarray

    @property
    def x_adv_values(self) -> np.ndarray:
        return self.x_adv.values

    def max_linf(self) -> float:
        return float(np.abs(self.perturbation).max()) if self.perturbation.size else 0.0


def _unwrap(x, y) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    if isinstance(x, FeatureMatrix):
        values, names = x.values, x.feature_names
    else:
        values = np.asarray(x, dtype=np.float64)
        names = tuple(f"x{j:03d}" for j in range(values.shape[1]))
    ids = y.ids if isinstance(y, LabelVector) else np.asarray(y)
    return values, ids, names


def _clip_step(x_step, x0, epsilon, feature_range):
    """Feature-range clip first (when given), then project into the eps ball.

    The ball projection runs last so containment holds even when a test row
    sits outside the training feature range.
    """
    if feature_range is not None:
        lo, hi = feature_range
        x_step = np.clip(x_step, lo, hi)
    return np.clip(x_step, x0 - epsilon, x0 + epsilon)


def _finish(net, x0, x_adv, y, names, queries) -> AttackOutcome:
    probs_before, _ = forward(net, x0, mode="infer")
    probs_after, _ = forward(net, x_adv, mode="infer")
    clean_pred = probs_before.argmax(axis=1)
    adv_pred = probs_after.argmax(axis=1)
    flipped = (clean_pred == y) & (adv_pred != y)
    return AttackOutcome(
        x_adv=FeatureMatrix(names, x_adv),
        perturbation=x_adv - x0,
        flipped=flipped,
        queries=queries,
        clean_pred=clean_pred,
        adv_pred=adv_pred,
        probs_before=probs_before,
        probs_after=probs_after,
    )


def fgsm(net: DenseNetwork, x, y, cfg: AttackConfig, feature_range=None) -> AttackOutcome:
    """Single step of size epsilon along the sign of the input gradient.

    sign(0) = 0, so dead-gradient coordinates stay untouched.
    """
    if cfg.kind != "fgsm":
        raise ValueError(f"config kind is {cfg.kind!r}, expected 'fgsm'")
    x0, ids, names = _unwrap(x, y)
    grads = input_gradients(net, x0, ids)
    x_adv = x0 + cfg.epsilon * np.sign(grads)
    if cfg.clip_to_feature_range:
        x_adv = _clip_step(x_adv, x0, cfg.epsilon, _require_range(feature_range))
    return _finish(net, x0, x_adv, ids, names, queries=1)


def bim(net: DenseNetwork, x, y, cfg: AttackConfig, feature_range=None) -> AttackOutcome:
    """Iterated alpha-sized gradient-sign steps, each projected back into the
    epsilon neighborhood of the original input."""
    if cfg.kind != "bim":
        raise ValueError(f"config kind is {cfg.kind!r}, expected 'bim'")
    x0, ids, names = _unwrap(x, y)
    box = _require_range(feature_range) if cfg.clip_to_feature_range else None
    x_adv = _iterate(net, x0, x0, ids, cfg, box)
    return _finish(net, x0, x_adv, ids, names, queries=cfg.iterations)


def pgd(net: DenseNetwork, x, y, cfg: AttackConfig, feature_range=None) -> AttackOutcome:
    """BIM from a seeded uniform random start inside the start-radius box."""
    if cfg.kind != "pgd":
        raise ValueError(f"config kind is {cfg.kind!r}, expected 'pgd'")
    x0, ids, names = _unwrap(x, y)
    box = _require_range(feature_range) if cfg.clip_to_feature_range else None
    if cfg.random_start_radius > 0.0:
        rng = np.random.default_rng(cfg.seed)
        start = x0 + rng.uniform(
            -cfg.random_start_radius, cfg.random_start_radius, size=x0.shape
        )
        start = _clip_step(start, x0, cfg.epsilon, box)
    else:
        start = x0  # radius 0 reduces to BIM bit-for-bit
    x_adv = _iterate(net, start, x0, ids, cfg, box)
    return _finish(net, x0, x_adv, ids, names, queries=cfg.iterations)


def _iterate(net, x_t, x0, ids, cfg, feature_range):
    for _ in range(cfg.iterations):
        grads = input_gradients(net, x_t, ids)
        x_t = _clip_step(x_t + cfg.alpha * np.sign(grads), x0, cfg.epsilon, feature_range)
    return x_t


def _require_range(feature_range):
    if feature_range is None:
        raise ValueError("clip_to_feature_range is set but no feature range was supplied")
    return feature_range


_DISPATCH = {"fgsm": fgsm, "bim": bim, "pgd": pgd}


def run_attack(net: DenseNetwork, x, y, cfg: AttackConfig, feature_range=None) -> AttackOutcome:
    """Dispatch to the configured attack kind."""
    return _DISPATCH[cfg.kind](net, x, y, cfg, feature_range=feature_range)


def train_feature_range(bundle: DatasetBundle) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature [min, max] of the training split, the clipping box."""
    values = bundle.train_x.values
    return values.min(axis=0), values.max(axis=0)


def attack_batch(net: DenseNetwork, bundle: DatasetBundle, cfg: AttackConfig) -> AttackOutcome:
    """Attack the bundle's test split.

    Flip flags are already restricted to rows the clean model classifies
    correctly; a zero denominator is the metrics module's concern.
    """
    if bundle.test_x.n_samples == 0:
        raise ValueError("empty test split")
    feature_range = train_feature_range(bundle) if cfg.clip_to_feature_range else None
    return run_attack(net, bundle.test_x, bundle.test_y, cfg, feature_range=feature_range)


def write_outcome_csv(outcome: AttackOutcome, y, path) -> None:
    """Columnar per-row attack record for downstream analysis."""
    ids = y.ids if isinstance(y, LabelVector) else np.asarray(y)
    loss_before = cross_entropy_per_sample(outcome.probs_before, ids)
    loss_after = cross_entropy_per_sample(outcome.probs_after, ids)
    p_before = outcome.probs_before[np.arange(len(ids)), ids]
    p_after = outcome.probs_after[np.arange(len(ids)), ids]
    linf = np.abs(outcome.perturbation).max(axis=1) if outcome.perturbation.size else np.zeros(0)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "row_id",
                "flipped",
                "linf_norm",
                "loss_before",
                "loss_after",
                "p_correct_before",
                "p_correct_after",
            ]
        )
        for i in range(len(ids)):
            writer.writerow(
                [
                    i,
                    int(outcome.flipped[i]),
                    repr(float(linf[i])),
                    repr(float(loss_before[i])),
                    repr(float(loss_after[i])),
                    repr(float(p_before[i])),
                    repr(float(p_after[i])),
                ]
            )
