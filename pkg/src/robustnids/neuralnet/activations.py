"""Hidden-layer activations and their exact derivatives.

ReLU's derivative is exactly 0 for negative inputs (and at 0, by the
subgradient convention fixed here); ELU uses alpha = 1 with derivative 1 at
and above 0.
"""

from __future__ import annotations

import numpy as np


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def relu_prime(z: np.ndarray) -> np.ndarray:
    return (z > 0).astype(np.float64)


def tanh(z: np.ndarray) -> np.ndarray:
    return np.tanh(z)


def tanh_prime(z: np.ndarray) -> np.ndarray:
    t = np.tanh(z)
    return 1.0 - t * t


def elu(z: np.ndarray) -> np.ndarray:
    out = np.array(z, dtype=np.float64, copy=True)
    neg = z < 0
    out[neg] = np.expm1(z[neg])
    return out


def elu_prime(z: np.ndarray) -> np.ndarray:
    out = np.ones_like(z, dtype=np.float64)
    neg = z < 0
    out[neg] = np.exp(z[neg])
    return out


ACTIVATIONS = {
    "relu": (relu, relu_prime),
    "tanh": (tanh, tanh_prime),
    "elu": (elu, elu_prime),
}


def activation(name: str):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}; expected one of {sorted(ACTIVATIONS)}") from None
