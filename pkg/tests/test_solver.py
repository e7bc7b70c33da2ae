import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onerelu.core import Params, from_arrays
from onerelu.loss import floors, surrogate_objective
from onerelu.solver import SolveReport, SolverConfig, SolverError, minimize_surrogate


def _grid_min(d, active, lo=-5.0, hi=5.0, step=0.01):
    """Grid search over ``(beta, beta0)`` in ``[lo, hi]^q``.

    A 0.1 grid over the whole box seeds a window search at ``step`` that
    recenters until the best point is interior, then repeats at ``step / 10``.
    For a convex objective this finds the grid minimum without the full
    ``(10 / step)^q`` sweep.
    """
    q = d.p + 1
    A = np.hstack([d.X, np.ones((d.n, 1))])
    c = floors(d, active)

    def evaluate(points):
        r = np.maximum(points @ A.T, c) - d.y
        return np.einsum("ij,ij->i", r, r)

    def window(center, h, k):
        axes = [np.clip(b + h * np.arange(-k, k + 1), lo, hi) for b in center]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, q)

    axes = [np.arange(lo, hi + 1e-9, 0.1)] * q
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, q)
    vals = evaluate(pts)
    best, fbest = pts[np.argmin(vals)], vals.min()
    for h in (step, step / 10):
        while True:
            pts = window(best, h, 15)
            vals = evaluate(pts)
            i = np.argmin(vals)
            if vals[i] >= fbest:
                break
            best, fbest = pts[i], vals[i]
    return float(fbest)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(rel_tol=0)
    with pytest.raises(ValueError):
        SolverConfig(polish_rounds=-1)


def test_linear_data_all_active_is_exact():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(10, 3))
    y = X @ np.array([1.0, -2.0, 0.5]) + 7.0  # all positive
    d = from_arrays(X, y)
    assert d.m == 10
    rep = minimize_surrogate(d, d.pos_idx)
    assert rep.value <= 1e-18
    assert np.allclose(rep.params.beta, [1.0, -2.0, 0.5], atol=1e-9)
    assert rep.params.beta0 == pytest.approx(7.0, abs=1e-9)
    assert rep.converged


def test_empty_active_set_no_negatives():
    d = from_arrays([[1.0], [2.0], [-1.0]], [1.0, 2.0, 3.0])
    rep = minimize_surrogate(d, [])
    assert rep.value == pytest.approx(1 + 4 + 9, rel=1e-12)


def test_matches_normal_equations():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(15, 2))
    y = np.abs(rng.normal(size=15)) + 0.1
    d = from_arrays(X, y)
    A = np.hstack([X, np.ones((15, 1))])
    theta = np.linalg.solve(A.T @ A, A.T @ y)
    best = float(np.sum((A @ theta - y) ** 2))
    rep = minimize_surrogate(d, d.pos_idx)
    assert rep.value == pytest.approx(best, rel=1e-8)


def test_random_instance_against_grid_search():
    rng = np.random.default_rng(2024)
    X = rng.uniform(-1, 1, size=(6, 2))
    y = rng.uniform(-1, 1.5, size=6)
    d = from_arrays(X, y)
    pos = d.pos_idx.tolist()
    for r in range(len(pos) + 1):
        for active in itertools.combinations(pos, r):
            rep = minimize_surrogate(d, active)
            grid = _grid_min(d, active)
            assert rep.value <= grid + 1e-9
            assert grid - rep.value <= 1e-3


def test_report_value_matches_reevaluation(rng):
    d = from_arrays(rng.normal(size=(12, 3)), rng.normal(size=12))
    active = d.pos_idx[::2]
    rep = minimize_surrogate(d, active)
    assert isinstance(rep, SolveReport)
    assert rep.value == pytest.approx(surrogate_objective(d, active, rep.params), rel=1e-12, abs=1e-15)
    assert rep.active == frozenset(int(i) for i in active)
    assert "active_set" in rep.to_dict()


def test_history_is_nonincreasing(rng):
    for _ in range(30):
        d = from_arrays(rng.normal(size=(10, 2)), rng.normal(size=10))
        active = [i for i in d.pos_idx.tolist() if rng.random() < 0.5]
        h = np.array(minimize_surrogate(d, active).history)
        assert np.all(np.diff(h) <= 0)


def test_deterministic(rng):
    d = from_arrays(rng.normal(size=(9, 2)), rng.normal(size=9))
    a = minimize_surrogate(d, d.pos_idx[:2])
    b = minimize_surrogate(d, d.pos_idx[:2])
    assert a.params == b.params and a.value == b.value


def test_singular_design_takes_a_minimizer():
    # duplicated column: least squares has a continuum of minimizers
    X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
    y = np.array([1.0, 3.0, 2.0, 5.0])
    d = from_arrays(X, y)
    rep = minimize_surrogate(d, d.pos_idx)
    A = np.hstack([X[:, :1], np.ones((4, 1))])
    t = np.linalg.lstsq(A, y, rcond=None)[0]
    assert rep.value == pytest.approx(float(np.sum((A @ t - y) ** 2)), rel=1e-9)
    assert rep.params.beta[0] == pytest.approx(rep.params.beta[1], rel=1e-9)


def test_warm_start_reaches_same_value(rng):
    d = from_arrays(rng.normal(size=(10, 2)), rng.normal(size=10))
    cold = minimize_surrogate(d, d.pos_idx[1:])
    warm = minimize_surrogate(d, d.pos_idx[1:], init=Params([3.0, -3.0], 2.0))
    assert warm.value == pytest.approx(cold.value, rel=1e-8, abs=1e-10)


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_non_finite_objective_raises():
    d = from_arrays([[1e200]], [1.0])
    with pytest.raises(SolverError):
        minimize_surrogate(d, [0], init=Params([1e200]))


def test_iteration_budget_reports_nonconvergence_with_best_iterate():
    rng = np.random.default_rng(5)
    y = np.abs(rng.normal(size=30)) + 0.1
    d = from_arrays(rng.normal(size=(30, 3)) * np.array([1, 100, 0.01]), y)
    rep = minimize_surrogate(d, d.pos_idx, SolverConfig(max_iters=1, polish_rounds=0))
    assert rep.iterations <= 1
    assert not rep.converged
    full = minimize_surrogate(d, d.pos_idx)
    assert full.converged and full.value <= rep.value


@given(st.integers(0, 2**32 - 1))
def test_optimality_against_random_probes(seed):
    rng = np.random.default_rng(seed)
    d = from_arrays(rng.normal(size=(8, 2)), rng.normal(size=8))
    active = [i for i in d.pos_idx.tolist() if rng.random() < 0.5]
    rep = minimize_surrogate(d, active)
    base = rep.params.as_vector()
    for _ in range(20):
        probe = Params.from_vector(base + 1e-3 * rng.normal(size=3))
        assert surrogate_objective(d, active, probe) >= rep.value - 1e-10
