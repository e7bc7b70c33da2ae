"""Local improvement heuristics: the iterative active-set method, GD and mini-batch SGD.

GD and SGD treat the intercept as one more coordinate (design ``[X | 1]``)
and use the gradient ``(max(0, z) - y) (1 + sgn z) a`` with ``sgn(0) = -1``.
That convention makes the origin a stationary point: started at zero, no
sample is in the linear region and the method stops immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Dataset, Params, relu_objective, _check_dim
from .solver import SolveReport, SolverConfig, minimize_surrogate

MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class GdConfig:
    T: int = 1000
    eps: float = 0.01
    eta0: float = 1.0
    gamma_step: float = 0.03
    alpha: float = 0.6
    batch: Optional[int] = None

    def __post_init__(self):
        if self.T < 1 or not self.eps > 0 or not self.eta0 > 0:
            raise ValueError("need T >= 1, eps > 0, eta0 > 0")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma_step < 0:
            raise ValueError("gamma_step must be >= 0")
        if self.batch is not None and self.batch < 1:
            raise ValueError("batch must be >= 1")


def linear_region(d: Dataset, theta: Params) -> frozenset:
    """Positive-label samples whose score is strictly positive."""
    u = d.predict_linear(theta)
    return frozenset(int(i) for i in d.pos_idx if u[i] > 0)


def iterative_heuristic(
    d: Dataset, init: Params, T: int = 20, cfg: Optional[SolverConfig] = None
) -> SolveReport:
    """Alternate between solving the surrogate for a fixed active set and
    resetting the active set to the samples the new solution puts in the
    linear region, until the set repeats or ``T`` solves were made.

    Each solve is warm-started at the previous solution, so the recorded
    surrogate values never increase.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    _check_dim(d, init)
    cfg = cfg or SolverConfig()
    active = linear_region(d, init)
    rep = minimize_surrogate(d, active, cfg, init=init)
    values = [rep.value]
    t = 1
    while t < T:
        nxt = linear_region(d, rep.params)
        if nxt == active:
            break
        active = nxt
        rep = minimize_surrogate(d, active, cfg, init=rep.params)
        values.append(rep.value)
        t += 1
    return SolveReport(
        params=rep.params,
        value=rep.value,
        iterations=t,
        converged=linear_region(d, rep.params) == active,
        certificate=rep.certificate,
        history=tuple(values),
        active=active,
    )


def _batch_loss(A: np.ndarray, y: np.ndarray, theta: np.ndarray) -> float:
    r = np.maximum(A @ theta, 0.0) - y
    return float(r @ r)


def _descent(
    d: Dataset, cfg: GdConfig, init: Params, draw: Callable[[], np.ndarray]
) -> SolveReport:
    _check_dim(d, init)
    A_full = d.design
    y_full = d.y
    theta = init.as_vector()

    S = draw()
    A, y = A_full[S], y_full[S]
    prev, cur = math.inf, _batch_loss(A, y, theta)
    history = [cur]
    eta = cfg.eta0
    t = 0
    g_norm = 0.0
    stalled = False
    while t < cfg.T and prev - cur > cfg.eps:
        S = draw()
        A, y = A_full[S], y_full[S]
        z = A @ theta
        w = (np.maximum(z, 0.0) - y) * np.where(z > 0, 2.0, 0.0)
        grad = (A.T @ w) / S.shape[0]
        g_norm = float(np.linalg.norm(grad))
        base = _batch_loss(A, y, theta)
        for _ in range(MAX_BACKTRACKS):
            trial = theta - eta * grad
            trial_loss = _batch_loss(A, y, trial)
            if trial_loss < base:
                break
            eta *= cfg.alpha
        else:
            stalled = True
            break
        theta = trial
        eta = cfg.eta0 / (1.0 + cfg.gamma_step * t)
        t += 1
        prev, cur = cur, trial_loss
        history.append(cur)

    params = Params.from_vector(theta)
    return SolveReport(
        params=params,
        value=relu_objective(d, params),
        iterations=t,
        converged=stalled or t < cfg.T,
        certificate=g_norm,
        history=tuple(history),
    )


def gradient_descent(d: Dataset, cfg: Optional[GdConfig] = None, init: Optional[Params] = None) -> SolveReport:
    """Full-batch GD with backtracking and the ``eta0 / (1 + gamma t)`` step reset."""
    cfg = cfg or GdConfig()
    init = init if init is not None else Params.zeros(d.p)
    everyone = np.arange(d.n)
    return _descent(d, cfg, init, lambda: everyone)


def default_batch(n: int) -> int:
    return max(1, int(math.floor(0.1 * n)))


def sgd(
    d: Dataset, cfg: Optional[GdConfig] = None, init: Optional[Params] = None, seed: int = 0
) -> SolveReport:
    """Mini-batch SGD: a fresh uniformly drawn batch (without replacement) each iteration.

    Batch indices are sorted before use so ``batch == n`` repeats GD exactly.
    """
    cfg = cfg or GdConfig()
    init = init if init is not None else Params.zeros(d.p)
    batch = cfg.batch if cfg.batch is not None else default_batch(d.n)
    if batch > d.n:
        raise ValueError(f"batch {batch} exceeds n = {d.n}")
    rng = np.random.default_rng(seed)

    def draw() -> np.ndarray:
        return np.sort(rng.choice(d.n, size=batch, replace=False))

    return _descent(d, cfg, init, draw)
