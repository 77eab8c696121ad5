"""Gradient-based evasion attacks over the dense-network input gradients."""

from .evasion import (
    ATTACK_KINDS,
    AttackConfig,
    AttackOutcome,
    attack_batch,
    bim,
    fgsm,
    pgd,
    run_attack,
    train_feature_range,
    write_outcome_csv,
)

__all__ = [
    "ATTACK_KINDS",
    "AttackConfig",
    "AttackOutcome",
    "attack_batch",
    "bim",
    "fgsm",
    "pgd",
    "run_attack",
    "train_feature_range",
    "write_outcome_csv",
]
