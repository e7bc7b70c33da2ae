"""The convex surrogate pieces and their subgradients.

Every per-sample term used here has the form ``(max(u, c) - y)**2`` where
``u`` is the linear score and ``c >= y`` is a *floor*:

* active positive samples: ``c = -inf`` (plain least squares),
* inactive positive samples: ``c = 2y`` (this is ``sigma(u, y)``),
* non-positive samples: ``c = 0`` (the ReLU loss, i.e. ``phi``).

Because ``c >= y`` each term is convex, flat below ``c`` and quadratic
above it.  The solver works exclusively with this floor vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import Dataset, Params, _check_dim

ActiveSet = frozenset


@dataclass(frozen=True)
class SubgradientVector:
    g_beta: np.ndarray
    g_beta0: float

    def as_vector(self) -> np.ndarray:
        return np.append(self.g_beta, self.g_beta0)


def _sum(v: np.ndarray) -> float:
    return float(np.sum(v))


def sigma(x, y):
    """``(x - y)^2`` if ``x > 2y`` else ``y^2``.  Vectorized."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = np.where(x > 2 * y, (x - y) ** 2, y * y)
    return float(out) if out.ndim == 0 else out


def sigma_grad(x, y):
    """d sigma / dx, taking the flat piece's derivative (0) at ``x = 2y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = np.where(x > 2 * y, 2 * (x - y), 0.0)
    return float(out) if out.ndim == 0 else out


def psi_y(u, Y, y):
    """Asymptotic integrand: sigma on ``0 < Y <= y``, least squares above, ReLU loss for ``Y <= 0``."""
    floor = psi_floor(Y, y)
    out = (np.maximum(np.asarray(u, dtype=np.float64), floor) - Y) ** 2
    return float(out) if out.ndim == 0 else out


def psi_grad(u, Y, y):
    floor = psi_floor(Y, y)
    u = np.asarray(u, dtype=np.float64)
    out = np.where(u > floor, 2 * (u - Y), 0.0)
    return float(out) if out.ndim == 0 else out


def psi_floor(Y, y):
    Y = np.asarray(Y, dtype=np.float64)
    if np.any(np.asarray(y) < 0):
        raise ValueError("y must be >= 0")
    return np.where(Y <= 0, 0.0, np.where(Y <= y, 2 * Y, -np.inf))


def check_active(d: Dataset, active: Iterable[int]) -> ActiveSet:
    active = ActiveSet(int(i) for i in active)
    if not active <= set(d.pos_idx.tolist()):
        bad = sorted(active - set(d.pos_idx.tolist()))
        raise ValueError(f"active set contains non-positive-label samples {bad[:5]}")
    return active


def floors(d: Dataset, active: Iterable[int]) -> np.ndarray:
    """Per-sample floor vector ``c`` for the surrogate with the given active set."""
    active = check_active(d, active)
    c = np.zeros(d.n)
    c[d.pos_idx] = 2 * d.y[d.pos_idx]
    if active:
        c[np.fromiter(active, dtype=np.intp)] = -np.inf
    return c


def floored_value(u: np.ndarray, c: np.ndarray, y: np.ndarray) -> float:
    r = np.maximum(u, c) - y
    return float(r @ r) if r.shape[0] <= 10_000 else float(np.sum(r * r))


def phi(d: Dataset, theta: Params) -> float:
    """ReLU loss restricted to the non-positive labels."""
    _check_dim(d, theta)
    if d.neg_idx.size == 0:
        return 0.0
    u = d.X[d.neg_idx] @ theta.beta + theta.beta0
    r = np.maximum(u, 0.0) - d.y[d.neg_idx]
    return _sum(r * r)


def phi_subgradient(d: Dataset, theta: Params) -> SubgradientVector:
    _check_dim(d, theta)
    Xn = d.X[d.neg_idx]
    u = Xn @ theta.beta + theta.beta0
    w = np.where(u > 0, 2 * (u - d.y[d.neg_idx]), 0.0)
    return SubgradientVector(Xn.T @ w, _sum(w))


def surrogate_objective(d: Dataset, active: Iterable[int], theta: Params) -> float:
    """Least squares on ``active``, sigma on the other positives, plus ``phi``."""
    c = floors(d, active)
    return floored_value(d.predict_linear(theta), c, d.y)


def subgradient_surrogate(d: Dataset, active: Iterable[int], theta: Params) -> SubgradientVector:
    c = floors(d, active)
    u = d.predict_linear(theta)
    w = np.where(u > c, 2 * (u - d.y), 0.0)
    return SubgradientVector(d.X.T @ w, _sum(w))


def empirical_S(d: Dataset, theta: Params, y: float) -> float:
    """``(1/n) sum_i psi_y(x_i.beta + beta0, Y_i)`` (keeps the 1/n factor)."""
    vals = psi_y(d.predict_linear(theta), d.y, y)
    return _sum(np.atleast_1d(vals)) / d.n
