"""Dense feed-forward networks: construction, forward pass, serialization.

Everything runs in 64-bit floats; finite-difference gradient tolerances are
not reachable at 32-bit.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .activations import ACTIVATIONS, activation

# Canonical architecture presets; hidden widths grow with depth.
ARCH_PRESETS = {
    "model1": (64,),
    "model2": (64, 128),
    "model3": (64, 128, 128),
    "model4": (64, 128, 512, 128),
    "model5": (64, 128, 512, 128, 64),
}

# Predicted probabilities are floored here before any log.
PROB_FLOOR = 1e-12

_MAGIC = b"DNETWORK"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ArchitectureSpec:
    """Input width, hidden (width, activation) stack, dropout, and class count."""

    input_dim: int
    hidden: tuple[tuple[int, str], ...]
    output_classes: int = 2
    dropout_p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple((int(w), a) for w, a in self.hidden))
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if self.output_classes < 2:
            raise ValueError("output_classes must be >= 2")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must lie in [0, 1)")
        for width, act in self.hidden:
            if width < 1:
                raise ValueError("hidden widths must be >= 1")
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")

    @property
    def depth(self) -> int:
        return len(self.hidden)

    @classmethod
    def preset(
        cls,
        name_or_depth,
        input_dim: int,
        activation: str = "relu",
        dropout_p: float = 0.0,
        output_classes: int = 2,
    ) -> "ArchitectureSpec":
        """Build one of the five canonical architectures, e.g. "model3" or depth 3."""
        key = f"model{name_or_depth}" if isinstance(name_or_depth, int) else str(name_or_depth)
        if key not in ARCH_PRESETS:
            raise ValueError(f"unknown preset {name_or_depth!r}; expected model1..model5")
        hidden = tuple((w, activation) for w in ARCH_PRESETS[key])
        return cls(input_dim, hidden, output_classes, dropout_p)


@dataclass
class Layer:
    weights: np.ndarray  # (in_dim, out_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str  # hidden activation name, or "linear" for the output layer


@dataclass
class DenseNetwork:
    """Fitted or freshly initialized dense net. The final layer is linear and
    feeds a softmax head."""

    layers: list[Layer]
    dropout_p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least the output layer")
        for i in range(len(self.layers) - 1):
            if self.layers[i].weights.shape[1] != self.layers[i + 1].weights.shape[0]:
                raise ValueError(f"layer {i}->{i + 1} dimension mismatch")
        for i, layer in enumerate(self.layers):
            if layer.bias.shape != (layer.weights.shape[1],):
                raise ValueError(f"layer {i} bias shape mismatch")
            if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.bias))):
                raise ValueError(f"layer {i} has non-finite parameters")

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[0]

    @property
    def output_classes(self) -> int:
        return self.layers[-1].weights.shape[1]

    @property
    def hidden_layers(self) -> list[Layer]:
        return self.layers[:-1]

    @property
    def spec(self) -> ArchitectureSpec:
        return ArchitectureSpec(
            input_dim=self.input_dim,
            hidden=tuple((l.weights.shape[1], l.activation) for l in self.hidden_layers),
            output_classes=self.output_classes,
            dropout_p=self.dropout_p,
        )

    def copy(self) -> "DenseNetwork":
        return DenseNetwork(
            layers=[Layer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers],
            dropout_p=self.dropout_p,
            seed=self.seed,
        )


@dataclass
class ForwardTrace:
    """Per-layer cache from one forward pass, consumed by backpropagation.

    ``activations[i]`` is the input that layer i saw (so activations[0] is the
    batch itself); dropout masks are present only for training-mode passes.
    """

    activations: list[np.ndarray]
    pre_activations: list[np.ndarray]
    dropout_masks: list[np.ndarray | None] = field(default_factory=list)
    training: bool = False


def init_network(spec: ArchitectureSpec, seed: int) -> DenseNetwork:
    """Scaled-uniform weight init (limit sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    dims = [spec.input_dim] + [w for w, _ in spec.hidden] + [spec.output_classes]
    acts = [a for _, a in spec.hidden] + ["linear"]
    layers = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], acts):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        layers.append(Layer(weights, np.zeros(fan_out), act))
    return DenseNetwork(layers=layers, dropout_p=spec.dropout_p, seed=seed)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def forward(
    net: DenseNetwork,
    x: np.ndarray,
    mode: str = "infer",
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardTrace]:
    """Run the batch through the network and return (probabilities, trace).

    Inference mode never applies dropout. Training mode applies inverted
    dropout (masks scaled by 1/(1-p)) to every hidden activation and needs a
    seed or generator when dropout_p > 0.
    """
    if mode not in ("train", "infer"):
        raise ValueError("mode must be 'train' or 'infer'")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ValueError(f"expected batch shape (n, {net.input_dim}), got {x.shape}")

    use_dropout = mode == "train" and net.dropout_p > 0.0
    if use_dropout and rng is None:
        if seed is None:
            raise ValueError("training-mode forward with dropout needs a seed or rng")
        rng = np.random.default_rng(seed)

    trace = ForwardTrace(activations=[x], pre_activations=[], training=(mode == "train"))
    h = x
    for layer in net.hidden_layers:
        z = h @ layer.weights + layer.bias
        a = activation(layer.activation)[0](z)
        mask = None
        if use_dropout:
            mask = (rng.random(a.shape) >= net.dropout_p).astype(np.float64)
            a = a * mask / (1.0 - net.dropout_p)
        trace.pre_activations.append(z)
        trace.dropout_masks.append(mask)
        trace.activations.append(a)
        h = a
    out = net.layers[-1]
    logits = h @ out.weights + out.bias
    trace.pre_activations.append(logits)
    return softmax(logits), trace


def predict(net: DenseNetwork, x: np.ndarray) -> np.ndarray:
    """Class ids from an inference-mode forward pass."""
    probs, _ = forward(net, x, mode="infer")
    return probs.argmax(axis=1)


def save_network(net: DenseNetwork, path) -> None:
    """Flat self-describing binary: magic, version, JSON header, then every
    parameter array as little-endian float64. Round-trips bit-exactly."""
    arrays = []
    meta = []
    for i, layer in enumerate(net.layers):
        arrays.append(np.ascontiguousarray(layer.weights, dtype="<f8"))
        meta.append({"name": f"layer{i}.weights", "shape": list(layer.weights.shape)})
        arrays.append(np.ascontiguousarray(layer.bias, dtype="<f8"))
        meta.append({"name": f"layer{i}.bias", "shape": list(layer.bias.shape)})
    spec = net.spec
    header = json.dumps(
        {
            "input_dim": spec.input_dim,
            "hidden": [[w, a] for w, a in spec.hidden],
            "output_classes": spec.output_classes,
            "dropout_p": net.dropout_p,
            "seed": net.seed,
            "arrays": meta,
        }
    ).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _FORMAT_VERSION, len(header)))
        fh.write(header)
        for arr in arrays:
            fh.write(arr.tobytes())


def load_network(path) -> DenseNetwork:
    with Path(path).open("rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a network file")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        arrays = {}
        for meta in header["arrays"]:
            shape = tuple(meta["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            arrays[meta["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()

    hidden = [(int(w), a) for w, a in header["hidden"]]
    acts = [a for _, a in hidden] + ["linear"]
    layers = [
        Layer(arrays[f"layer{i}.weights"], arrays[f"layer{i}.bias"], act)
        for i, act in enumerate(acts)
    ]
    return DenseNetwork(layers=layers, dropout_p=header["dropout_p"], seed=header["seed"])
