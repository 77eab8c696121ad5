"""From-scratch dense network engine: inference, gradients, training."""

from .activations import ACTIVATIONS
from .gradients import cross_entropy, cross_entropy_per_sample, input_gradients, param_gradients
from .network import (
    ARCH_PRESETS,
    ArchitectureSpec,
    DenseNetwork,
    ForwardTrace,
    Layer,
    forward,
    init_network,
    load_network,
    predict,
    save_network,
    softmax,
)
from .training import AdvTrainConfig, TrainingConfig, TrainingDiverged, adversarial_fit, fit

__all__ = [
    "ACTIVATIONS",
    "ARCH_PRESETS",
    "AdvTrainConfig",
    "ArchitectureSpec",
    "DenseNetwork",
    "ForwardTrace",
    "Layer",
    "TrainingConfig",
    "TrainingDiverged",
    "adversarial_fit",
    "cross_entropy",
    "cross_entropy_per_sample",
    "fit",
    "forward",
    "init_network",
    "input_gradients",
    "load_network",
    "param_gradients",
    "predict",
    "save_network",
    "softmax",
]
