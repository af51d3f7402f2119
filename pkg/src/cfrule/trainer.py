"""Per-instance gradient descent over all channel weights.

For one instance with augmented input ``xa = (1, x_1, ..., x_d)``:

* ``z_ji = w_ji * xa_i`` and ``phi_j = f_cf(z_j)``
* ``psi_j = u_j * phi_j`` and ``M = f_cf(psi)``
* ``D = T - M``
* ``du_j = lr * D * g_j * phi_j``
* ``dw_ji = lr * D * g_j * u_j * h_ji * xa_i``

where ``g_j`` is the partial of ``f_cf`` over the influences with respect
to ``psi_j`` and ``h_ji`` the partial over channel ``j``'s arguments with
respect to ``z_ji``.  Every gradient is evaluated at the pre-update
weights; the result is then projected back onto ``u in [0, 1]`` and
``w in [-1, 1]``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .cf import combine_rows, partial_rows, value_and_partials
from .model import CfModel, Instance, to_arrays

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    learning_rate: float = 0.2
    max_epochs: int = 1000
    mse_delta_epsilon: float = 1e-5
    shuffle_seed: Optional[int] = None
    init_mode: str = "mcro"
    random_weight_range: float = 0.3
    random_u_range: tuple[float, float] = (0.05, 0.3)
    train_bias: bool = True
    snapshot_stride: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if not self.mse_delta_epsilon > 0:
            raise ValueError("mse_delta_epsilon must be positive")
        if self.init_mode not in ("random", "mcro"):
            raise ValueError(f"unknown init mode {self.init_mode!r}")
        lo, hi = self.random_u_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError("random_u_range must satisfy 0 <= lo <= hi <= 1")
        if not 0.0 <= self.random_weight_range <= 1.0:
            raise ValueError("random_weight_range must lie in [0, 1]")


@dataclass
class TrainTrace:
    """Per-epoch training MSE and optional weight snapshots.

    ``initial_mse`` is measured before the first epoch; ``mse[e]`` after
    epoch ``e + 1``.  ``snapshots`` maps epoch number to a copy of the
    ``(k, d + 1)`` weight matrix (bias in column 0).
    """

    initial_mse: float = float("nan")
    mse: list[float] = field(default_factory=list)
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    converged: bool = False

    @property
    def epochs(self) -> int:
        return len(self.mse)

    def write_csv(self, path, weight_columns: Optional[list[tuple[int, int]]] = None) -> None:
        """Write ``epoch, mse`` rows, plus ``w_j_i`` columns for snapshotted epochs.

        ``weight_columns`` lists 1-based ``(channel, input)`` pairs; input 0
        is the bias.  Epochs without a snapshot leave those cells empty.
        """
        cols = weight_columns or []
        with open(Path(path), "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["epoch", "mse"] + [f"w_{j}_{i}" for j, i in cols])
            for e, value in enumerate(self.mse, start=1):
                row = [e, repr(float(value))]
                snap = self.snapshots.get(e)
                for j, i in cols:
                    row.append("" if snap is None else repr(float(snap[j - 1, i])))
                out.writerow(row)


def random_init(k: int, d: int, cfg: TrainConfig, rng: np.random.Generator) -> CfModel:
    """Uniform random weights in +-random_weight_range, u in random_u_range."""
    if k < 1 or d < 1:
        raise ValueError("need k >= 1 channels and d >= 1 inputs")
    r = cfg.random_weight_range
    lo, hi = cfg.random_u_range
    u = rng.uniform(lo, hi, size=k)
    W = rng.uniform(-r, r, size=(k, d + 1))
    return CfModel(u, W)


# -- gradients ---------------------------------------------------------------

def _augment(x: np.ndarray) -> np.ndarray:
    return np.concatenate([[1.0], x])


def _forward(u, W, xa):
    z = W * xa
    phi = combine_rows(z)
    psi = u * phi
    return z, phi, psi, float(combine_rows(psi))


def _features(inst) -> np.ndarray:
    return inst.features if isinstance(inst, Instance) else np.asarray(inst, dtype=float)


def instance_error(m: CfModel, inst: Instance) -> tuple[float, float]:
    """``(E, D)`` with ``E = (T - M)^2 / 2`` and ``D = T - M``."""
    out = float(m.outputs(inst.features))
    d = inst.target - out
    return 0.5 * d * d, d


def output_weight_gradient(m: CfModel, j: int, inst) -> float:
    """``dM/du_j`` at the model's current weights."""
    if not -m.k <= j < m.k:
        raise IndexError(f"channel {j} out of range for {m.k} channels")
    x = m._check_dim(_features(inst))
    _, phi, psi, _ = _forward(m.u, m.weights, _augment(x))
    return float(partial_rows(psi)[j] * phi[j])


def input_weight_gradient(m: CfModel, j: int, i: int, inst) -> float:
    """``dM/dw_ji``; ``i = 0`` is the bias (constant input 1)."""
    if not -m.k <= j < m.k:
        raise IndexError(f"channel {j} out of range for {m.k} channels")
    if not 0 <= i <= m.dim:
        raise IndexError(f"weight index {i} out of range 0..{m.dim}")
    xa = _augment(m._check_dim(_features(inst)))
    z, _, psi, _ = _forward(m.u, m.weights, xa)
    return float(partial_rows(psi)[j] * m.u[j] * partial_rows(z[j])[i] * xa[i])


def activation_gradient(m: CfModel, j: int, inst) -> np.ndarray:
    """``dphi_j/dw_ji`` for every ``i`` (bias first)."""
    xa = _augment(m._check_dim(_features(inst)))
    return partial_rows(m.weights[j] * xa) * xa


def gradients(m: CfModel, inst) -> tuple[np.ndarray, np.ndarray]:
    """``(dM/du, dM/dW)`` with shapes ``(k,)`` and ``(k, d + 1)``."""
    xa = _augment(m._check_dim(_features(inst)))
    z, phi, psi, _ = _forward(m.u, m.weights, xa)
    g = partial_rows(psi)
    return g * phi, (g * m.u)[:, None] * partial_rows(z) * xa


# -- updates -----------------------------------------------------------------

def _step(u: np.ndarray, W: np.ndarray, xa: np.ndarray, target: float,
          lr: float, train_bias: bool) -> None:
    """One in-place update of ``u`` and ``W`` on a single augmented instance."""
    z = W * xa
    phi, h = value_and_partials(z)
    psi = u * phi
    out, g = value_and_partials(psi)
    delta = target - float(out)
    if delta == 0.0:
        return
    scale = lr * delta * g
    du = scale * phi
    dW = (scale * u)[:, None] * h * xa
    if not train_bias:
        dW[:, 0] = 0.0
    u += du
    W += dW
    np.clip(u, 0.0, 1.0, out=u)
    np.clip(W, -1.0, 1.0, out=W)


def train_step(m: CfModel, inst: Instance, cfg: TrainConfig) -> CfModel:
    u = m.u.copy()
    W = m.weights.copy()
    _step(u, W, _augment(m._check_dim(inst.features)), inst.target,
          cfg.learning_rate, cfg.train_bias)
    return CfModel(u, W)


def mse(m: CfModel, data) -> float:
    X, y = to_arrays(data)
    return float(np.mean((y.astype(float) - m.outputs(X)) ** 2))


def train(m: CfModel, data, cfg: TrainConfig) -> tuple[CfModel, TrainTrace]:
    """Epochs of sequential per-instance updates until the MSE settles.

    Training stops after the first epoch whose MSE differs from the
    previous one (the initial MSE for epoch 1) by less than
    ``cfg.mse_delta_epsilon``, or after ``cfg.max_epochs`` epochs.
    """
    X, y = to_arrays(data)
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    m._check_dim(X)
    Xa = np.concatenate([np.ones((X.shape[0], 1)), X], axis=1)
    T = y.astype(float)
    u = m.u.copy()
    W = m.weights.copy()
    rng = np.random.default_rng(cfg.shuffle_seed) if cfg.shuffle_seed is not None else None

    def epoch_mse():
        return float(np.mean((T - combine_rows(u * combine_rows(W * Xa[:, None, :]))) ** 2))

    trace = TrainTrace(initial_mse=epoch_mse())
    prev = trace.initial_mse
    order = np.arange(X.shape[0])
    for epoch in range(1, cfg.max_epochs + 1):
        if rng is not None:
            order = rng.permutation(X.shape[0])
        for n in order:
            _step(u, W, Xa[n], T[n], cfg.learning_rate, cfg.train_bias)
        cur = epoch_mse()
        trace.mse.append(cur)
        if cfg.snapshot_stride and epoch % cfg.snapshot_stride == 0:
            trace.snapshots[epoch] = W.copy()
        if abs(prev - cur) < cfg.mse_delta_epsilon:
            trace.converged = True
            break
        prev = cur
    if cfg.snapshot_stride and trace.epochs not in trace.snapshots:
        trace.snapshots[trace.epochs] = W.copy()
    log.debug("trained %d epochs, final mse %.6g, converged=%s",
              trace.epochs, trace.mse[-1], trace.converged)
    return CfModel(u, W), trace
