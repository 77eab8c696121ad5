"""Mini-batch training (clean and adversarial) over dataset bundles."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from ..datapipe.bundle import DatasetBundle
from .gradients import cross_entropy, param_gradients
from .network import DenseNetwork, forward

if TYPE_CHECKING:
    from ..attacks.evasion import AttackConfig

OPTIMIZERS = ("sgd", "adam")


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the epoch/batch diagnostic."""


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 20
    batch_size: int = 256
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    loss: str = "cross_entropy"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.loss != "cross_entropy":
            raise ValueError("only cross_entropy loss is supported")


@dataclass(frozen=True)
class AdvTrainConfig:
    """Adversarial-training recipe: which attack perturbs what fraction of
    each batch, starting at which epoch (1-indexed)."""

    inner_attack: "AttackConfig"
    adversarial_fraction: float = 0.5
    from_epoch: int = 1

    def __post_init__(self):
        if not 0.0 < self.adversarial_fraction <= 1.0:
            raise ValueError("adversarial_fraction must lie in (0, 1]")
        if self.from_epoch < 1:
            raise ValueError("from_epoch must be >= 1")


class _Optimizer:
    def __init__(self, cfg: TrainingConfig, net: DenseNetwork):
        self.cfg = cfg
        self.step = 0
        if cfg.optimizer == "adam":
            self.m = [
                (np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in net.layers
            ]
            self.v = [
                (np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in net.layers
            ]

    def apply(self, net: DenseNetwork, grads) -> None:
        cfg = self.cfg
        if cfg.optimizer == "sgd":
            for layer, (gw, gb) in zip(net.layers, grads):
                layer.weights -= cfg.learning_rate * gw
                layer.bias -= cfg.learning_rate * gb
            return
        self.step += 1
        bc1 = 1.0 - cfg.beta1**self.step
        bc2 = 1.0 - cfg.beta2**self.step
        for i, (layer, (gw, gb)) in enumerate(zip(net.layers, grads)):
            mw, mb = self.m[i]
            vw, vb = self.v[i]
            mw *= cfg.beta1
            mw += (1 - cfg.beta1) * gw
            mb *= cfg.beta1
            mb += (1 - cfg.beta1) * gb
            vw *= cfg.beta2
            vw += (1 - cfg.beta2) * gw**2
            vb *= cfg.beta2
            vb += (1 - cfg.beta2) * gb**2
            layer.weights -= cfg.learning_rate * (mw / bc1) / (np.sqrt(vw / bc2) + cfg.adam_eps)
            layer.bias -= cfg.learning_rate * (mb / bc1) / (np.sqrt(vb / bc2) + cfg.adam_eps)


def _attack_batch_seed(base_seed: int, epoch: int, batch: int) -> int:
    # Stable per-batch stream so every inner attack sees fresh randomness.
    return int(np.random.SeedSequence((base_seed & 0xFFFFFFFF, epoch, batch)).generate_state(1)[0])


def _fit_loop(
    net: DenseNetwork,
    x: np.ndarray,
    y: np.ndarray,
    cfg: TrainingConfig,
    adv: AdvTrainConfig | None,
) -> tuple[DenseNetwork, float, list[float]]:
    from ..attacks.evasion import run_attack  # local import: attacks depend on this package

    model = net.copy()
    rng = np.random.default_rng(cfg.seed)
    opt = _Optimizer(cfg, model)
    n = x.shape[0]
    curve: list[float] = []
    start = time.perf_counter()

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        epoch_losses = []
        for b, lo in enumerate(range(0, n, cfg.batch_size)):
            idx = order[lo : lo + cfg.batch_size]
            xb = x[idx]
            yb = y[idx]
            if adv is not None and epoch >= adv.from_epoch:
                m = xb.shape[0]
                n_adv = int(round(adv.adversarial_fraction * m))
                if n_adv > 0:
                    pick = rng.permutation(m)[:n_adv]
                    inner = adv.inner_attack.reseed(
                        _attack_batch_seed(adv.inner_attack.seed, epoch, b)
                    )
                    outcome = run_attack(model, xb[pick], yb[pick], inner)
                    xb = xb.copy()
                    xb[pick] = outcome.x_adv_values
            probs, trace = forward(model, xb, mode="train", rng=rng)
            loss = cross_entropy(probs, yb)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss {loss} at epoch {epoch}, batch {b}"
                )
            epoch_losses.append(loss)
            grads = param_gradients(model, xb, yb, trace)
            opt.apply(model, grads)
        curve.append(float(np.mean(epoch_losses)))

    elapsed = time.perf_counter() - start
    return model, elapsed, curve


def fit(
    net: DenseNetwork, bundle: DatasetBundle, cfg: TrainingConfig
) -> tuple[DenseNetwork, float, list[float]]:
    """Train a copy of ``net`` on the bundle's training split.

    Returns (trained network, wall-clock seconds, per-epoch mean loss).
    """
    if bundle.n_features != net.input_dim:
        raise ValueError(
            f"bundle has {bundle.n_features} features, network expects {net.input_dim}"
        )
    return _fit_loop(net, bundle.train_x.values, bundle.train_y.ids, cfg, adv=None)


def adversarial_fit(
    net: DenseNetwork,
    bundle: DatasetBundle,
    cfg: TrainingConfig,
    adv: AdvTrainConfig,
) -> tuple[DenseNetwork, float, list[float]]:
    """Like fit, but a seeded fraction of every batch is replaced by
    adversarial examples generated against the current parameters."""
    if bundle.n_features != net.input_dim:
        raise ValueError(
            f"bundle has {bundle.n_features} features, network expects {net.input_dim}"
        )
    return _fit_loop(net, bundle.train_x.values, bundle.train_y.ids, cfg, adv=adv)
