"""Sweep grids: configuration enumeration and stable per-run seeds."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..attacks.evasion import ATTACK_KINDS, AttackConfig
from ..neuralnet.activations import ACTIVATIONS
from ..neuralnet.training import AdvTrainConfig, TrainingConfig

CLEAN_DEFENSE = "clean"

PAPER_DEPTHS = (1, 2, 3, 4, 5)
PAPER_FEATURE_COUNTS = (12, 30, 50, 75, 100, 123)
PAPER_ACTIVATIONS = ("relu", "tanh", "elu")
PAPER_DROPOUTS = (0.0, 0.5)
PAPER_ATTACKS = ("fgsm", "bim", "pgd")
PAPER_EPSILONS = (0.1, 0.3, 0.5)


def stable_seed(*parts) -> int:
    """Deterministic 32-bit seed from the textual form of the parts.

    Adding new grid values must never reshuffle existing cells, so seeds hash
    the configuration itself rather than its position in the enumeration.
    """
    text = "|".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass(frozen=True)
class AdvArm:
    """One adversarially trained comparison arm."""

    name: str
    depth: int
    feature_count: int
    activation: str
    dropout: float = 0.0
    inner_kind: str = "pgd"
    inner_epsilon: float = 0.3
    adversarial_fraction: float = 0.5
    from_epoch: int = 1

    def adv_config(self, seed: int) -> AdvTrainConfig:
        return AdvTrainConfig(
            inner_attack=AttackConfig.default(self.inner_kind, self.inner_epsilon, seed=seed),
            adversarial_fraction=self.adversarial_fraction,
            from_epoch=self.from_epoch,
        )


@dataclass(frozen=True)
class RunConfig:
    """One sweep cell: model coordinates plus one attack setting."""

    depth: int
    feature_count: int
    activation: str
    dropout: float
    attack: str
    epsilon: float
    repeat: int
    defense: str = CLEAN_DEFENSE
    model_seed: int = 0
    attack_seed: int = 0
    bundle_seed: int = 0

    def cell_key(self) -> tuple:
        """Model identity: all attack cells of one trained model share this."""
        return (self.defense, self.depth, self.feature_count, self.activation, self.dropout, self.repeat)

    def run_key(self) -> tuple:
        return self.cell_key() + (self.attack, self.epsilon)

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "feature_count": self.feature_count,
            "activation": self.activation,
            "dropout": self.dropout,
            "attack": self.attack,
            "epsilon": self.epsilon,
            "repeat": self.repeat,
            "defense": self.defense,
            "model_seed": self.model_seed,
            "attack_seed": self.attack_seed,
            "bundle_seed": self.bundle_seed,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        return cls(**raw)


@dataclass(frozen=True)
class SweepSpec:
    depths: tuple[int, ...] = PAPER_DEPTHS
    feature_counts: tuple[int, ...] = PAPER_FEATURE_COUNTS
    activations: tuple[str, ...] = PAPER_ACTIVATIONS
    dropouts: tuple[float, ...] = PAPER_DROPOUTS
    attacks: tuple[str, ...] = PAPER_ATTACKS
    epsilons: tuple[float, ...] = PAPER_EPSILONS
    repeats: int = 1
    base_seed: int = 0
    training: TrainingConfig = field(default_factory=TrainingConfig)
    adversarial_arms: tuple[AdvArm, ...] = ()

    def __post_init__(self):
        for name in ("depths", "feature_counts", "activations", "dropouts", "attacks", "epsilons"):
            items = getattr(self, name)
            object.__setattr__(self, name, tuple(items))
            if not items:
                raise ValueError(f"{name} must be non-empty")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for d in self.depths:
            if d not in PAPER_DEPTHS:
                raise ValueError(f"depth {d} outside 1..5")
        for a in self.activations:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        for a in self.attacks:
            if a not in ATTACK_KINDS:
                raise ValueError(f"unknown attack {a!r}")

    def spec_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def to_json(self) -> str:
        payload = {
            "depths": list(self.depths),
            "feature_counts": list(self.feature_counts),
            "activations": list(self.activations),
            "dropouts": list(self.dropouts),
            "attacks": list(self.attacks),
            "epsilons": list(self.epsilons),
            "repeats": self.repeats,
            "base_seed": self.base_seed,
            "training": vars(self.training) if not isinstance(self.training, dict) else self.training,
            "adversarial_arms": [vars(arm) for arm in self.adversarial_arms],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        raw = json.loads(text)
        raw["training"] = TrainingConfig(**raw.get("training", {}))
        raw["adversarial_arms"] = tuple(AdvArm(**a) for a in raw.get("adversarial_arms", ()))
        for key in ("depths", "feature_counts", "activations", "dropouts", "attacks", "epsilons"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def enumerate_runs(spec: SweepSpec) -> list[RunConfig]:
    """Deterministic cartesian product: model grid x attack grid x repeats,
    then any adversarial arms over the same attack grid and repeats."""
    runs = []
    for repeat in range(spec.repeats):
        for depth in spec.depths:
            for feat in spec.feature_counts:
                for act in spec.activations:
                    for drop in spec.dropouts:
                        cell = (CLEAN_DEFENSE, depth, feat, act, drop, repeat)
                        model_seed = stable_seed(spec.base_seed, "model", *cell)
                        bundle_seed = stable_seed(spec.base_seed, "bundle", feat, repeat)
                        for attack in spec.attacks:
                            for eps in spec.epsilons:
                                runs.append(
                                    RunConfig(
                                        depth=depth,
                                        feature_count=feat,
                                        activation=act,
                                        dropout=drop,
                                        attack=attack,
                                        epsilon=eps,
                                        repeat=repeat,
                                        defense=CLEAN_DEFENSE,
                                        model_seed=model_seed,
                                        attack_seed=stable_seed(
                                            spec.base_seed, "attack", *cell, attack, eps
                                        ),
                                        bundle_seed=bundle_seed,
                                    )
                                )
        for arm in spec.adversarial_arms:
            cell = (arm.name, arm.depth, arm.feature_count, arm.activation, arm.dropout, repeat)
            model_seed = stable_seed(spec.base_seed, "model", *cell)
            bundle_seed = stable_seed(spec.base_seed, "bundle", arm.feature_count, repeat)
            for attack in spec.attacks:
                for eps in spec.epsilons:
                    runs.append(
                        RunConfig(
                            depth=arm.depth,
                            feature_count=arm.feature_count,
                            activation=arm.activation,
                            dropout=arm.dropout,
                            attack=attack,
                            epsilon=eps,
                            repeat=repeat,
                            defense=arm.name,
                            model_seed=model_seed,
                            attack_seed=stable_seed(spec.base_seed, "attack", *cell, attack, eps),
                            bundle_seed=bundle_seed,
                        )
                    )
    if not runs:
        raise ValueError("empty sweep")
    return runs
