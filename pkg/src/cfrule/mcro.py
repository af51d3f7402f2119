"""Regression-seeded initialisation (multi-channel regression-based optimisation).

A least-squares fit of the 0/1 target on the inputs rescaled to [0, 1]
estimates each input's influence on the output.  In the near-linear regime
the model output is approximately ``sum_i (sum_j u_j w_ji) x_i``, so the
initial weights are drawn at random subject to ``sum_j u_j w_ji = c_i``,
with ``c`` the fitted coefficients re-expressed over bipolar inputs.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import CfModel, to_arrays

log = logging.getLogger(__name__)

RIDGE_LAMBDA = 1e-8
U_RANGE = (0.2, 0.8)


@dataclass
class RegressionFit:
    """Coefficients ``b_0..b_d`` over inputs rescaled to [0, 1]."""

    coefficients: np.ndarray
    rss: float
    ridge: bool = False

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.ndim != 1 or self.coefficients.size < 2:
            raise ValueError("need an intercept and at least one slope")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("regression coefficients must be finite")

    @property
    def dim(self) -> int:
        return self.coefficients.size - 1

    def bipolar(self) -> np.ndarray:
        """Coefficients of the same surface over bipolar inputs.

        With ``x' = (x + 1) / 2``: ``c_0 = b_0 + sum(b_i) / 2``, ``c_i = b_i / 2``.
        """
        b = self.coefficients
        c = b / 2.0
        c[0] = b[0] + b[1:].sum() / 2.0
        return c

    def write_csv(self, path) -> None:
        c = self.bipolar()
        with open(Path(path), "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["index", "b", "c"])
            for i, (bi, ci) in enumerate(zip(self.coefficients, c)):
                out.writerow([i, repr(float(bi)), repr(float(ci))])


def fit_linear(data) -> RegressionFit:
    """Least squares on the normal equations, ridge fallback if rank deficient."""
    X, y = to_arrays(data)
    n = X.shape[0]
    if n == 0:
        raise ValueError("cannot fit a regression to an empty dataset")
    A = np.concatenate([np.ones((n, 1)), (X + 1.0) / 2.0], axis=1)
    t = y.astype(float)
    gram = A.T @ A
    rhs = A.T @ t
    ridge = np.linalg.matrix_rank(A) < A.shape[1]
    if ridge:
        b = np.linalg.solve(gram + RIDGE_LAMBDA * np.eye(gram.shape[0]), rhs)
    else:
        b = np.linalg.solve(gram, rhs)
    resid = t - A @ b
    return RegressionFit(b, float(resid @ resid), ridge)


@dataclass
class McroInit:
    model: CfModel
    targets: np.ndarray
    warnings: list[str] = field(default_factory=list)


def _split_coordinate(c: float, u: np.ndarray, shares: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Weights ``w_j`` with ``sum_j u_j w_j = c`` and every ``|w_j| <= 1``.

    Random shares are blended toward shares proportional to ``u`` (which
    spread ``c`` evenly as ``c / sum(u)``) just far enough to be feasible.
    If even that fails, ``c`` is pulled in to ``+-sum(u)``.
    """
    total = u.sum()
    scaled = False
    if abs(c) > total:
        c = float(np.sign(c) * total)
        scaled = True
    if c == 0.0:
        return np.zeros_like(u), c, scaled
    even = u / total
    # feasibility per channel: |c| * ((1 - t) a_j + t e_j) <= u_j, linear in t
    lhs0 = abs(c) * shares - u
    slope = abs(c) * (even - shares)
    t = 0.0
    for a0, s in zip(lhs0, slope):
        if a0 > 0.0 and s < 0.0:
            t = max(t, min(1.0, a0 / -s))
    a = (1.0 - t) * shares + t * even
    w = np.clip(a * c / u, -1.0, 1.0)
    return w, c, scaled


def mcro_init_detailed(k: int, d: int, fit: RegressionFit, seed) -> McroInit:
    if k < 1:
        raise ValueError("need at least one channel")
    if fit.dim != d:
        raise ValueError(f"regression has {fit.dim} inputs, model needs {d}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(*U_RANGE, size=k)
    shares = rng.uniform(0.0, 1.0, size=(d + 1, k)) + 1e-3
    shares /= shares.sum(axis=1, keepdims=True)
    c = fit.bipolar()
    W = np.zeros((k, d + 1))
    targets = c.copy()
    warnings = []
    for i in range(d + 1):
        W[:, i], targets[i], scaled = _split_coordinate(c[i], u, shares[i])
        if scaled:
            warnings.append(f"coefficient {i} ({c[i]:.4g}) scaled to {targets[i]:.4g} "
                            f"to fit {k} channel(s)")
    for msg in warnings:
        log.warning(msg)
    return McroInit(CfModel(u, W), targets, warnings)


def mcro_init(k: int, d: int, fit: RegressionFit, seed) -> CfModel:
    """Random ``k``-channel model satisfying ``sum_j u_j w_ji = c_i`` for all i.

    Infeasible coefficients (``|c_i| > sum_j u_j``) are scaled to the
    boundary with a logged warning; use :func:`mcro_init_detailed` to get
    the warnings and the coefficients actually targeted.
    """
    return mcro_init_detailed(k, d, fit, seed).model
