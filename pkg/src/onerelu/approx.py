"""Active-set enumeration: the generalized approximation algorithm and the sorting method.

Candidates live in *rank space*: rank ``r`` (0-based) is the ``r``-th
smallest positive label, i.e. sample ``d.pos_idx[r]``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import Dataset, relu_objective
from .solver import SolveReport, SolverConfig, minimize_surrogate


@dataclass(frozen=True)
class CandidateFamily:
    """Distinct active sets (as rank sets) in first-enumerated order."""

    m: int
    k: int
    active_sets: tuple

    def __iter__(self) -> Iterator[frozenset]:
        return iter(self.active_sets)

    def __len__(self) -> int:
        return len(self.active_sets)

    def inactive_sets(self) -> list[frozenset]:
        full = frozenset(range(self.m))
        return [full - a for a in self.active_sets]


@dataclass(frozen=True)
class ApproxResult:
    best: SolveReport
    best_active: frozenset
    candidates_evaluated: int
    relu_value: float

    def to_dict(self) -> dict:
        return {
            "z_sigma": self.best.value,
            "obj": self.relu_value,
            "params": self.best.params.to_dict(),
            "active_set": sorted(self.best_active),
            "candidates_evaluated": self.candidates_evaluated,
        }


def inactive_from_tuple(idx: Sequence[int]) -> frozenset:
    """Inactive ranks for ``0 <= i_1 < ... < i_j <= m``: prefix ``1..i_1`` plus ``i_2..i_j`` (1-based)."""
    first, rest = idx[0], idx[1:]
    return frozenset(range(first)) | frozenset(i - 1 for i in rest)


def enumerate_candidates(m: int, k: int) -> CandidateFamily:
    if m < 0 or k < 0:
        raise ValueError("need m >= 0 and k >= 0")
    full = frozenset(range(m))
    seen: dict[frozenset, None] = {}
    for j in range(1, min(k, m + 1) + 1):
        for idx in combinations(range(m + 1), j):
            active = full - inactive_from_tuple(idx)
            seen.setdefault(active, None)
    return CandidateFamily(m, k, tuple(seen))


def tuple_count(m: int, k: int) -> int:
    """Number of index tuples before deduplication: ``sum_{j<=k} C(m+1, j)``."""
    from math import comb

    return sum(comb(m + 1, j) for j in range(1, k + 1))


def ranks_to_samples(d: Dataset, ranks) -> frozenset:
    return frozenset(int(d.pos_idx[r]) for r in ranks)


def _solve_one(args):
    d, active, cfg = args
    return minimize_surrogate(d, active, cfg)


def solve_candidates(d: Dataset, actives: Sequence[frozenset], cfg: SolverConfig, workers: int = 1) -> list[SolveReport]:
    """Solve every candidate (sample-id active sets); output order matches input order."""
    jobs = [(d, a, cfg) for a in actives]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_solve_one(j) for j in jobs]


def _pick(d: Dataset, actives, reports, key: str) -> ApproxResult:
    if key == "relu":
        scores = [relu_objective(d, r.params) for r in reports]
    else:
        scores = [r.value for r in reports]
    i = int(np.argmin(scores))  # first minimum wins ties
    best = reports[i]
    return ApproxResult(best, actives[i], len(reports), relu_objective(d, best.params))


def generalized_approx(
    d: Dataset, k: int = 1, cfg: Optional[SolverConfig] = None, workers: int = 1
) -> ApproxResult:
    """Enumerate the ``sum_j C(m+1, j)`` structured active sets and keep the best surrogate value.

    Guarantees ``z_opt <= objective <= (n/k) z_opt``; exact on realizable data.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    cfg = cfg or SolverConfig()
    fam = enumerate_candidates(d.m, k)
    actives = [ranks_to_samples(d, a) for a in fam]
    reports = solve_candidates(d, actives, cfg, workers)
    return _pick(d, actives, reports, "surrogate")


def sorting_prefixes(m: int, N: int) -> list[frozenset]:
    """Active rank sets for the ``N + 1`` prefix splits ``floor(t m / N)``, ``t = 0..N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    full = frozenset(range(m))
    seen: dict[frozenset, None] = {}
    for t in range(N + 1):
        cut = (t * m) // N
        seen.setdefault(full - frozenset(range(cut)), None)
    return list(seen)


def sorting_method(
    d: Dataset,
    N: int = 10,
    cfg: Optional[SolverConfig] = None,
    workers: int = 1,
    select: str = "relu",
) -> ApproxResult:
    """Prefix-only variant with ``N + 1`` splits of the sorted positive labels.

    ``select="relu"`` keeps the candidate with the smallest true objective;
    ``select="surrogate"`` ranks by ``z_sigma`` like :func:`generalized_approx`.
    ``N`` larger than ``m`` only repeats prefixes, which are solved once.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if select not in ("relu", "surrogate"):
        raise ValueError("select must be 'relu' or 'surrogate'")
    cfg = cfg or SolverConfig()
    actives = [ranks_to_samples(d, a) for a in sorting_prefixes(d.m, N)]
    reports = solve_candidates(d, actives, cfg, workers)
    return _pick(d, actives, reports, select)
