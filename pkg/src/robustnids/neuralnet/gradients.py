"""Cross-entropy loss and exact analytic gradients (parameters and inputs)."""

from __future__ import annotations

import numpy as np

from .activations import activation
from .network import PROB_FLOOR, DenseNetwork, ForwardTrace, forward


def cross_entropy_per_sample(probs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """-log p[i, y_i] with p floored at PROB_FLOOR."""
    p = probs[np.arange(len(y)), y]
    return -np.log(np.maximum(p, PROB_FLOOR))


def cross_entropy(probs: np.ndarray, y: np.ndarray) -> float:
    """Mean categorical cross-entropy of a probability batch."""
    return float(cross_entropy_per_sample(probs, np.asarray(y)).mean())


def _output_delta(probs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d(per-sample loss)/d(logits): softmax minus one-hot.

    Rows whose true-class probability sits at the floor have locally constant
    (clamped) loss, so their gradient is zero.
    """
    n = probs.shape[0]
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    clamped = probs[np.arange(n), y] <= PROB_FLOOR
    delta[clamped] = 0.0
    return delta


def param_gradients(
    net: DenseNetwork, x: np.ndarray, y: np.ndarray, trace: ForwardTrace
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Gradients of the mean cross-entropy w.r.t. every weight and bias.

    ``trace`` must come from a forward pass of (net, x); dropout masks in the
    trace are replayed exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    n = x.shape[0]
    if len(trace.activations) != len(net.layers) or trace.activations[0].shape != x.shape:
        raise ValueError("stale trace: shapes do not match the network and batch")
    probs = _softmax_from_trace(trace)
    delta = _output_delta(probs, y) / n

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        inbound = trace.activations[i]
        grads[i] = (inbound.T @ delta, delta.sum(axis=0))
        if i == 0:
            break
        delta = delta @ layer.weights.T
        mask = trace.dropout_masks[i - 1] if trace.dropout_masks else None
        if mask is not None:
            delta = delta * mask / (1.0 - net.dropout_p)
        prime = activation(net.layers[i - 1].activation)[1]
        delta = delta * prime(trace.pre_activations[i - 1])
    return grads


def input_gradients(net: DenseNetwork, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample gradient of that sample's own cross-entropy w.r.t. its features.

    Runs its own inference-mode forward pass (no dropout), so each output row
    depends only on the matching input row.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    probs, trace = forward(net, x, mode="infer")
    delta = _output_delta(probs, y)
    for i in range(len(net.layers) - 1, 0, -1):
        delta = delta @ net.layers[i].weights.T
        prime = activation(net.layers[i - 1].activation)[1]
        delta = delta * prime(trace.pre_activations[i - 1])
    return delta @ net.layers[0].weights.T


def _softmax_from_trace(trace: ForwardTrace) -> np.ndarray:
    logits = trace.pre_activations[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)
