"""Minimizer for the convex surrogate ``z_sigma(I)``.

The objective is ``F(theta) = sum_i (max(a_i.theta, c_i) - y_i)^2`` with
floors ``c_i >= y_i`` (see :mod:`onerelu.loss`), an unconstrained convex
piecewise quadratic with one kink per floored term.

Phase 1 is subgradient descent with Armijo backtracking from the start
point.  It hands over to phase 2 once the piece pattern stops changing.
Phase 2 (piece-polish) classifies every term as above its floor, below it,
or sitting on the kink; kink terms are split using the minimum-norm
subgradient into "release upward", "release downward" and "pinned".  The
least-squares problem over the upward terms with the pinned scores held
fixed is solved exactly and the step towards it is taken with an exact
line search over the piecewise quadratic.  A round is accepted only if the
objective decreases; the loop stops when the minimum-norm subgradient
vanishes or after ``polish_rounds`` rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import lsq_linear

from .core import Dataset, Params, _check_dim
from .loss import floors, surrogate_objective


class SolverError(RuntimeError):
    """Raised when the objective becomes non-finite."""


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    rel_tol: float = 1e-10
    grad_tol: float = 1e-8
    polish_rounds: int = 20

    def __post_init__(self):
        if self.max_iters < 1 or self.polish_rounds < 0:
            raise ValueError("max_iters must be >= 1 and polish_rounds >= 0")
        if not (self.rel_tol > 0 and self.grad_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class SolveReport:
    params: Params
    value: float
    iterations: int
    converged: bool
    certificate: float
    history: tuple = field(default=(), repr=False)
    active: Optional[frozenset] = None

    def to_dict(self) -> dict:
        out = {
            "params": self.params.to_dict(),
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "certificate": self.certificate,
        }
        if self.active is not None:
            out["active_set"] = sorted(self.active)
        return out


ARMIJO_C = 1e-4
MAX_HALVINGS = 60
STABLE_HANDOFF = 1
RCOND = 1e-12


@dataclass
class _Problem:
    X: np.ndarray
    A: np.ndarray
    y: np.ndarray
    c: np.ndarray
    row_norm: np.ndarray

    @classmethod
    def build(cls, d: Dataset, c: np.ndarray) -> "_Problem":
        A = d.design
        return cls(d.X, A, d.y, c, np.sqrt(np.einsum("ij,ij->i", A, A)))

    def scores(self, theta: np.ndarray) -> np.ndarray:
        return self.X @ theta[:-1] + theta[-1]

    def value(self, u: np.ndarray) -> float:
        r = np.maximum(u, self.c) - self.y
        v = float(r @ r) if r.shape[0] <= 10_000 else float(np.sum(r * r))
        if not math.isfinite(v):
            raise SolverError("non-finite objective; check the data")
        return v

    def grad(self, u: np.ndarray) -> np.ndarray:
        w = np.where(u > self.c, 2.0 * (u - self.y), 0.0)
        return np.append(self.X.T @ w, w.sum())


def _line_min(u, w, c, y) -> float:
    """Exact minimizer ``t >= 0`` of ``sum (max(u + t w, c) - y)^2``."""
    nz = w != 0
    if not nz.any():
        return 0.0
    u, w, c, y = u[nz], w[nz], c[nz], y[nz]
    with np.errstate(invalid="ignore", divide="ignore"):
        b = (c - u) / w
    up = w > 0
    on0 = np.where(up, b <= 0, b > 0)
    da = 2.0 * w * (u - y)
    db = 2.0 * w * w
    ev = np.isfinite(b) & (b > 0)
    tb = b[ev]
    sign = np.where(up[ev], 1.0, -1.0)
    order = np.argsort(tb, kind="stable")
    tb = tb[order]
    alphas = np.concatenate(([da[on0].sum()], (sign * da[ev])[order]))
    betas = np.concatenate(([db[on0].sum()], (sign * db[ev])[order]))
    alphas = np.cumsum(alphas)
    betas = np.cumsum(betas)
    starts = np.concatenate(([0.0], tb))
    ends = np.concatenate((tb, [np.inf]))
    dstart = alphas + betas * starts
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.where(betas > 0, -alphas / betas, np.inf)
    hit = (dstart >= 0) | (root <= ends)
    if not hit.any():
        return float(starts[-1])
    k = int(np.argmax(hit))
    if dstart[k] >= 0:
        return float(starts[k])
    return float(max(root[k], starts[k]))


def _kinks(prob: _Problem, u: np.ndarray, theta: np.ndarray):
    """Split terms into (strictly above floor, on a kink with a nontrivial subdifferential)."""
    c = prob.c
    finite = np.isfinite(c)
    cf = np.where(finite, c, 0.0)
    tau = 1e-9 * (1.0 + np.abs(cf) + prob.row_norm * np.linalg.norm(theta))
    kink = finite & (np.abs(u - cf) <= tau)
    above = (u > c) & ~kink
    width = np.where(kink, 2.0 * (cf - prob.y), 0.0)
    kink &= width > 1e-12 * (1.0 + np.abs(cf))
    return above, kink, width


def _min_norm_subgradient(prob: _Problem, u: np.ndarray, theta: np.ndarray) -> np.ndarray:
    above, kink, width = _kinks(prob, u, theta)
    g = prob.A[above].T @ (2.0 * (u[above] - prob.y[above]))
    if kink.any():
        AK = prob.A[kink].T
        hi = width[kink]
        s = lsq_linear(AK, -g, bounds=(np.zeros(hi.size), hi), method="bvls").x
        g = g + AK @ np.clip(s, 0.0, hi)
    return g


def _pinned_fit(prob: _Problem, theta: np.ndarray, quad: np.ndarray, pin: np.ndarray) -> np.ndarray:
    """Least-squares fit on ``quad`` with the ``pin`` scores held at their floors."""
    A = prob.A
    base = theta
    N = None
    if pin.any():
        AW = A[pin]
        U, S, Vt = np.linalg.svd(AW, full_matrices=True)
        r = int(np.sum(S > S[0] * RCOND))
        resid = prob.c[pin] - AW @ theta
        base = theta + Vt[:r].T @ ((U[:, :r].T @ resid) / S[:r])
        N = Vt[r:].T
        if N.shape[1] == 0:
            return base
    AQ = A[quad]
    if AQ.shape[0] == 0:
        return base
    rhs = prob.y[quad] - AQ @ base
    if N is None:
        return base + np.linalg.lstsq(AQ, rhs, rcond=RCOND)[0]
    return base + N @ np.linalg.lstsq(AQ @ N, rhs, rcond=RCOND)[0]


def _newton_target(prob: _Problem, theta: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Minimizer of the local quadratic model, kink terms settled by their multipliers."""
    above, pin, width = _kinks(prob, u, theta)
    quad = above.copy()
    A, y = prob.A, prob.y
    while True:
        target = _pinned_fit(prob, theta, quad, pin)
        if not pin.any():
            return target
        r = A[quad] @ target - y[quad]
        grad = 2.0 * (A[quad].T @ r)
        mult = np.linalg.lstsq(A[pin].T, -grad, rcond=RCOND)[0]
        hi = width[pin]
        over = mult - hi
        under = -mult
        slack = 1e-9 * (1.0 + hi)
        worst = np.maximum(over, under)
        k = int(np.argmax(worst))
        if worst[k] <= slack[k]:
            return target
        i = np.flatnonzero(pin)[k]
        pin[i] = False
        if over[k] > under[k]:
            quad[i] = True


def minimize_floored(prob: _Problem, cfg: SolverConfig, theta0: Optional[np.ndarray] = None):
    q = prob.A.shape[1]
    theta = np.zeros(q) if theta0 is None else np.array(theta0, dtype=np.float64)
    u = prob.scores(theta)
    F = prob.value(u)
    history = [F]
    gtol = cfg.grad_tol * max(1.0, math.sqrt(F) * float(prob.row_norm.max(initial=0.0)))
    iters = 0

    # phase 1: subgradient descent, Armijo backtracking
    pattern = u > prob.c
    stable = 0
    step = 1.0
    while iters < cfg.max_iters:
        g = prob.grad(u)
        gg = float(g @ g)
        if math.sqrt(gg) <= gtol:
            break
        step = min(1.0, 2.0 * step)
        for _ in range(MAX_HALVINGS):
            trial = theta - step * g
            ut = prob.scores(trial)
            Ft = prob.value(ut)
            if Ft <= F - ARMIJO_C * step * gg:
                break
            step *= 0.5
        else:
            break
        iters += 1
        drop = F - Ft
        theta, u, F = trial, ut, Ft
        history.append(F)
        if drop <= cfg.rel_tol * max(F, 1e-300):
            break
        new_pattern = u > prob.c
        stable = stable + 1 if np.array_equal(new_pattern, pattern) else 0
        pattern = new_pattern
        if stable >= STABLE_HANDOFF:
            break

    # phase 2: piece-polish
    g = _min_norm_subgradient(prob, u, theta)
    cert = float(np.linalg.norm(g))
    rounds = 0
    while cert > gtol and rounds < cfg.polish_rounds:
        rounds += 1
        moved = False
        for direction in (_newton_target(prob, theta, u) - theta, -g):
            t = _line_min(u, prob.scores(direction), prob.c, prob.y)
            if not t > 0:
                continue
            trial = theta + t * direction
            ut = prob.scores(trial)
            Ft = prob.value(ut)
            if Ft < F:
                theta, u, F = trial, ut, Ft
                history.append(F)
                moved = True
                break
        if not moved:
            break
        g = _min_norm_subgradient(prob, u, theta)
        cert = float(np.linalg.norm(g))

    converged = cert <= gtol
    return theta, F, iters + rounds, converged, cert, history


def _solve(d: Dataset, c: np.ndarray, cfg: SolverConfig, init: Optional[Params]) -> tuple:
    prob = _Problem.build(d, c)
    theta0 = None
    if init is not None:
        _check_dim(d, init)
        theta0 = init.as_vector()
    return minimize_floored(prob, cfg, theta0)


def minimize_surrogate(
    d: Dataset,
    active: Iterable[int],
    cfg: Optional[SolverConfig] = None,
    init: Optional[Params] = None,
) -> SolveReport:
    """Minimize least squares on ``active`` + sigma on the other positives + phi.

    ``active`` holds sample ids (0-based) with positive labels.  The default
    start is ``theta = 0``; ``init`` warm-starts phase 1.
    """
    cfg = cfg or SolverConfig()
    active = frozenset(int(i) for i in active)
    c = floors(d, active)
    theta, _, iters, conv, cert, hist = _solve(d, c, cfg, init)
    params = Params.from_vector(theta)
    return SolveReport(
        params=params,
        value=surrogate_objective(d, active, params),
        iterations=iters,
        converged=conv,
        certificate=cert,
        history=tuple(hist),
        active=active,
    )
