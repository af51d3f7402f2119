"""Certainty-factor combining function and its partial derivatives.

The combining function splits its arguments by sign.  Nonnegative
arguments are merged with the probabilistic sum ``1 - prod(1 - x)``,
negative ones with its mirror ``-1 + prod(1 + y)``, and the two parts are
added.  Zero goes to the nonnegative branch, which also fixes the
derivative convention at the kink.

The scalar functions validate their input.  The ``*_rows`` variants work
on the last axis of an array and skip validation; the trainer uses them
on values it already keeps in range.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

SNAP_TOL = 1e-9


def _checked(values, lo: float, hi: float, name: str) -> list[float]:
    vals = np.asarray(values, dtype=float).ravel().tolist()
    if not vals:
        return vals
    if not all(map(math.isfinite, vals)):
        raise ValueError(f"{name}: non-finite certainty factor")
    if min(vals) < lo - SNAP_TOL or max(vals) > hi + SNAP_TOL:
        raise ValueError(f"{name}: values must lie in [{lo}, {hi}]")
    return [min(max(v, lo), hi) for v in vals]


# Scalar versions use Python floats (much cheaper than numpy for short
# inputs) and sort the factors so the product is independent of order.

def cf_positive(xs: Sequence[float]) -> float:
    """Combine nonnegative certainty factors: ``1 - prod(1 - x)``."""
    vals = _checked(xs, 0.0, 1.0, "cf_positive")
    return 1.0 - math.prod(sorted(1.0 - v for v in vals))


def cf_negative(ys: Sequence[float]) -> float:
    """Combine nonpositive certainty factors: ``-1 + prod(1 + y)``."""
    vals = _checked(ys, -1.0, 0.0, "cf_negative")
    return -1.0 + math.prod(sorted(1.0 + v for v in vals))


def cf_combine(zs: Sequence[float]) -> float:
    vals = _checked(zs, -1.0, 1.0, "cf_combine")
    plus = math.prod(sorted(1.0 - v for v in vals if v >= 0.0))
    minus = math.prod(sorted(1.0 + v for v in vals if v < 0.0))
    return (1.0 - plus) + (-1.0 + minus)


def cf_partial(zs: Sequence[float], j: int) -> float:
    """Partial derivative of :func:`cf_combine` with respect to ``zs[j]``.

    For ``zs[j] >= 0`` this is the product of ``1 - z`` over the *other*
    nonnegative arguments; for ``zs[j] < 0`` the product of ``1 + z`` over
    the other negative arguments.  Callers apply any chain-rule factor.
    """
    arr = np.array(_checked(zs, -1.0, 1.0, "cf_partial"))
    if not -arr.size <= j < arr.size:
        raise IndexError(f"argument index {j} out of range for {arr.size} arguments")
    return float(partial_rows(arr)[j])


def combine_rows(z: np.ndarray) -> np.ndarray:
    """Vectorised combining function over the last axis (no validation).

    Factors are sorted before the product so the rounding, and hence the
    result, does not depend on argument order.
    """
    pos = z >= 0.0
    fplus = 1.0 - np.prod(np.sort(np.where(pos, 1.0 - z, 1.0), axis=-1), axis=-1)
    fminus = -1.0 + np.prod(np.sort(np.where(pos, 1.0, 1.0 + z), axis=-1), axis=-1)
    return fplus + fminus


def exclusive_prod(f: np.ndarray) -> np.ndarray:
    """``out[..., i] = prod(f[..., l] for l != i)`` without division.

    Built from prefix and suffix products so exact zero factors, which
    occur whenever an argument hits +-1, stay exact.
    """
    out = np.ones_like(f)
    np.cumprod(f[..., :-1], axis=-1, out=out[..., 1:])
    suffix = np.cumprod(f[..., :0:-1], axis=-1)
    out[..., :-1] *= suffix[..., ::-1]
    return out


def value_and_partials(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Combining function and all its partials over the last axis."""
    pos = z >= 0.0
    # both sign branches go through one exclusive product
    f = np.empty((2,) + z.shape)
    np.subtract(1.0, z, out=f[0])
    np.add(1.0, z, out=f[1])
    f[0][~pos] = 1.0
    f[1][pos] = 1.0
    ex = exclusive_prod(f)
    # ex[b, ..., 0] * f[b, ..., 0] is the full product of branch b
    full = ex[..., 0] * f[..., 0]
    value = full[1] - full[0]
    return value, np.where(pos, ex[0], ex[1])


def partial_rows(z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`cf_partial` for every argument on the last axis."""
    return value_and_partials(z)[1]
