import itertools

import numpy as np
import pytest

from onerelu.core import Params, from_arrays, relu_objective
from onerelu.oracle import MAX_ORACLE_M, OracleTooLarge, all_active_sets, brute_force_opt, verify_ratio
from onerelu.solver import minimize_surrogate
from onerelu.statgen import StatModelSpec, generate_instance


def test_two_point_instance_against_grid():
    d = from_arrays([[1.0], [2.0]], [1.0, -1.0])
    grid = np.arange(-5, 5 + 1e-9, 0.005)
    B, B0 = np.meshgrid(grid, grid, indexing="ij")
    vals = (np.maximum(0, B + B0) - 1) ** 2 + (np.maximum(0, 2 * B + B0) + 1) ** 2
    rep = brute_force_opt(d)
    assert rep.value <= vals.min() + 1e-9
    assert vals.min() - rep.value <= 1e-3
    # pinned: the negative sample always costs at least 1 and the positive can be fit
    assert rep.value == pytest.approx(1.0, abs=1e-9)


def test_realizable_instance_has_zero_optimum():
    inst = generate_instance(StatModelSpec(p=2, n=10, seed=1))
    assert brute_force_opt(inst.train).value <= 1e-12


def test_no_positive_labels_single_solve():
    d = from_arrays([[1.0], [2.0]], [-1.0, 0.0])
    assert all_active_sets(d) == [frozenset()]
    assert brute_force_opt(d).value == pytest.approx(1.0, abs=1e-12)


def test_refuses_large_m():
    d = from_arrays(np.ones((MAX_ORACLE_M + 1, 1)), np.arange(1, MAX_ORACLE_M + 2, dtype=float))
    with pytest.raises(OracleTooLarge):
        brute_force_opt(d)
    with pytest.raises(ValueError):
        brute_force_opt(from_arrays(np.ones((4, 1)), np.ones(4)), max_m=3)


def test_all_active_sets_count(rng):
    d = from_arrays(rng.normal(size=(9, 2)), np.abs(rng.normal(size=9)))
    sets = all_active_sets(d)
    assert len(sets) == 2**d.m == len(set(sets))


def test_oracle_is_a_lower_bound(rng):
    for _ in range(5):
        d = from_arrays(rng.normal(size=(8, 2)), rng.normal(size=8))
        rep = brute_force_opt(d)
        for r in range(d.m + 1):
            for active in itertools.combinations(d.pos_idx.tolist(), r):
                assert rep.value <= minimize_surrogate(d, active).value + 1e-8
        thetas = rng.normal(scale=3, size=(1000, 3))
        for t in thetas:
            assert rep.value <= relu_objective(d, Params.from_vector(t)) + 1e-6
        # the minimizer's surrogate value is attained by the ReLU loss itself
        assert relu_objective(d, rep.params) == pytest.approx(rep.value, abs=1e-8)
        assert rep.active is not None


def test_verify_ratio(rng):
    inst = generate_instance(StatModelSpec(p=2, n=8, seed=3))
    assert verify_ratio(inst.train, 1) * max(brute_force_opt(inst.train).value, 1e-300) <= 1e-8
    for _ in range(10):
        d = from_arrays(rng.normal(size=(8, 2)), rng.normal(size=8))
        r = verify_ratio(d, 1)
        assert 1 - 1e-6 <= r <= d.n + 1e-6


def test_verify_ratio_full_family_is_one(rng):
    d = from_arrays(rng.normal(size=(7, 1)), rng.normal(size=7))
    # k = m + 1 enumerates every subset
    assert verify_ratio(d, d.m + 1) == pytest.approx(1.0, abs=1e-6)
