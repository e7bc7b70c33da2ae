"""Exact global optimum for small instances.

The best surrogate value over *all* active sets equals the global optimum of
the ReLU least-squares problem, so exhausting the ``2^m`` subsets of the
positive labels gives an exact (up to solver tolerance) oracle.
"""

from __future__ import annotations

from itertools import combinations
from typing import Optional

import numpy as np

from .approx import generalized_approx, solve_candidates
from .core import Dataset
from .solver import SolveReport, SolverConfig

MAX_ORACLE_M = 20


class OracleTooLarge(ValueError):
    """Refusal to enumerate ``2^m`` active sets for ``m > MAX_ORACLE_M``."""


def all_active_sets(d: Dataset) -> list[frozenset]:
    pos = [int(i) for i in d.pos_idx]
    return [frozenset(c) for r in range(len(pos) + 1) for c in combinations(pos, r)]


def brute_force_opt(
    d: Dataset, cfg: Optional[SolverConfig] = None, workers: int = 1, max_m: int = MAX_ORACLE_M
) -> SolveReport:
    """Minimum of the surrogate over every subset of the positive labels.

    The returned report's ``active`` field is the minimizing subset.
    """
    if d.m > max_m:
        raise OracleTooLarge(f"m = {d.m} positive labels exceeds the oracle limit {max_m}")
    cfg = cfg or SolverConfig()
    actives = all_active_sets(d)
    reports = solve_candidates(d, actives, cfg, workers)
    return reports[int(np.argmin([r.value for r in reports]))]


def verify_ratio(d: Dataset, k: int, cfg: Optional[SolverConfig] = None, tiny: float = 1e-300) -> float:
    """``z_approx / z_opt`` where ``z_approx`` is the true objective of the approximation output."""
    z_opt = brute_force_opt(d, cfg).value
    z_approx = generalized_approx(d, k, cfg).relu_value
    return z_approx / max(z_opt, tiny)
