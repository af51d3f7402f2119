"""Multi-channel model: data structures, forward pass, JSON persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cf import SNAP_TOL, combine_rows

MODEL_FORMAT_VERSION = 1


def _in_range(arr: np.ndarray, lo: float, hi: float) -> bool:
    return bool(np.all(np.isfinite(arr)) and arr.min(initial=lo) >= lo - SNAP_TOL
                and arr.max(initial=hi) <= hi + SNAP_TOL)


@dataclass(frozen=True)
class Instance:
    """Feature vector in [-1, 1] (bipolar, 0 = missing) and a class label."""

    features: np.ndarray
    label: bool

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim != 1:
            raise ValueError("instance features must be one-dimensional")
        if not _in_range(x, -1.0, 1.0):
            raise ValueError("instance features must lie in [-1, 1]")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "label", bool(self.label))

    @property
    def target(self) -> float:
        return 1.0 if self.label else 0.0


@dataclass(frozen=True)
class Channel:
    """One channel: output weight ``u``, bias, and ``d`` input weights."""

    u: float
    bias: float
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1:
            raise ValueError("channel input weights must be one-dimensional")
        if not _in_range(np.array([self.u]), 0.0, 1.0):
            raise ValueError(f"output weight {self.u} outside [0, 1]")
        if not _in_range(np.append(w, self.bias), -1.0, 1.0):
            raise ValueError("bias and input weights must lie in [-1, 1]")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return self.w.size

    def arguments(self, x: np.ndarray) -> np.ndarray:
        """The combining-function arguments ``(bias, w_1 x_1, ..., w_d x_d)``."""
        x = np.asarray(x, dtype=float)
        if x.shape != self.w.shape:
            raise ValueError(f"instance has {x.size} features, channel expects {self.dim}")
        return np.concatenate([[self.bias], self.w * x])


@dataclass(frozen=True)
class CfModel:
    """``k`` channels over ``d`` inputs, stored as arrays.

    ``u`` has shape ``(k,)``; ``weights`` has shape ``(k, d + 1)`` with the
    bias in column 0.  Models are immutable; the trainer
    builds new models rather than editing these arrays.
    """

    u: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        W = np.array(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != u.size or W.shape[1] < 2:
            raise ValueError("weights must have shape (k, d + 1) with d >= 1 and k = len(u)")
        if u.size < 1:
            raise ValueError("a model needs at least one channel")
        if not _in_range(u, 0.0, 1.0):
            raise ValueError("output weights must lie in [0, 1]")
        if not _in_range(W, -1.0, 1.0):
            raise ValueError("input weights and biases must lie in [-1, 1]")
        u = np.clip(u, 0.0, 1.0)
        W = np.clip(W, -1.0, 1.0)
        u.flags.writeable = False
        W.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "weights", W)

    @classmethod
    def from_channels(cls, channels: Sequence[Channel]) -> "CfModel":
        channels = list(channels)
        if not channels:
            raise ValueError("a model needs at least one channel")
        dims = {ch.dim for ch in channels}
        if len(dims) != 1:
            raise ValueError(f"channels disagree on dimensionality: {sorted(dims)}")
        u = np.array([ch.u for ch in channels])
        W = np.array([np.concatenate([[ch.bias], ch.w]) for ch in channels])
        return cls(u, W)

    @property
    def k(self) -> int:
        return self.u.size

    @property
    def dim(self) -> int:
        return self.weights.shape[1] - 1

    @property
    def channels(self) -> list[Channel]:
        return [Channel(self.u[j], self.weights[j, 0], self.weights[j, 1:].copy())
                for j in range(self.k)]

    def with_channel(self, channel: Channel) -> "CfModel":
        return CfModel.from_channels(self.channels + [channel])

    def permuted(self, order: Sequence[int]) -> "CfModel":
        order = list(order)
        return CfModel(self.u[order], self.weights[order])

    # forward pass, vectorised over instances -------------------------------

    def _check_dim(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise ValueError(f"instances have {X.shape[-1]} features, model expects {self.dim}")
        return X

    def activations(self, X: np.ndarray) -> np.ndarray:
        """Channel activations; shape ``X.shape[:-1] + (k,)``."""
        X = self._check_dim(X)
        xa = np.concatenate([np.ones(X.shape[:-1] + (1,)), X], axis=-1)
        return combine_rows(self.weights * xa[..., None, :])

    def influences(self, X: np.ndarray) -> np.ndarray:
        return self.u * self.activations(X)

    def outputs(self, X: np.ndarray) -> np.ndarray:
        return combine_rows(self.influences(X))

    def predict(self, X: np.ndarray, theta: float = 0.5) -> np.ndarray:
        return self.outputs(X) > theta

    # persistence ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": MODEL_FORMAT_VERSION,
            "dim": self.dim,
            "channels": [{"u": float(self.u[j]), "bias": float(self.weights[j, 0]),
                          "w": [float(v) for v in self.weights[j, 1:]]}
                         for j in range(self.k)],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CfModel":
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')!r}")
        channels = [Channel(c["u"], c["bias"], c["w"]) for c in doc["channels"]]
        model = cls.from_channels(channels)
        if model.dim != doc["dim"]:
            raise ValueError(f"declared dim {doc['dim']} does not match weights ({model.dim})")
        return model

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "CfModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _features(inst) -> np.ndarray:
    return inst.features if isinstance(inst, Instance) else np.asarray(inst, dtype=float)


def channel_activation(ch: Channel, inst) -> float:
    return float(combine_rows(ch.arguments(_features(inst))))


def channel_influence(ch: Channel, inst) -> float:
    return ch.u * channel_activation(ch, inst)


def model_output(m: CfModel, inst) -> float:
    return float(m.outputs(_features(inst)))


def classify(m: CfModel, inst, theta: float = 0.5) -> bool:
    """Positive iff the model output strictly exceeds ``theta``."""
    return model_output(m, inst) > theta


def to_arrays(data) -> tuple[np.ndarray, np.ndarray]:
    """``(X, y)`` from a dataset (anything with ``X``/``y``) or instances."""
    if hasattr(data, "X") and hasattr(data, "y"):
        return np.asarray(data.X, dtype=float), np.asarray(data.y, dtype=bool)
    data = list(data)
    if not data:
        return np.zeros((0, 0)), np.zeros(0, dtype=bool)
    X = np.array([inst.features for inst in data], dtype=float)
    y = np.array([inst.label for inst in data], dtype=bool)
    return X, y


def instances(X: np.ndarray, y: Iterable[bool]) -> list[Instance]:
    return [Instance(x, bool(lab)) for x, lab in zip(np.asarray(X, dtype=float), y)]
