"""Subset-sum to One-Node-ReLU reduction.

A ``{+-1}``-subset-sum instance asks for ``x in {-1, +1}^p`` with
``sum a_i x_i = sum(a) / 2``.  :func:`reduce_to_relu` turns it into a
``2p + 3`` sample regression problem whose optimal value equals
:func:`threshold` exactly when such an ``x`` exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import Dataset, from_arrays

MAX_DECIDE_P = 24


@dataclass(frozen=True)
class SubsetSumInstance:
    a: tuple

    def __post_init__(self):
        vals = tuple(self.a)
        for v in vals:
            if isinstance(v, bool) or int(v) != v or v < 0:
                raise ValueError(f"entries must be nonnegative integers, got {v!r}")
        object.__setattr__(self, "a", tuple(int(v) for v in vals))

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def total(self) -> int:
        return sum(self.a)


def to_pm1(inst: SubsetSumInstance) -> SubsetSumInstance:
    """Append ``a_{p+1} = sum(a)``; the result is ``{+-1}``-feasible iff ``a`` has a subset summing to ``sum(a) / 2``."""
    return SubsetSumInstance(inst.a + (inst.total,))


def threshold(p: int) -> int:
    if p < 1:
        raise ValueError("p must be >= 1")
    return p + 100 * p * p


def reduce_to_relu(inst: SubsetSumInstance, p: int | None = None) -> Dataset:
    """Rows ``(a, sum/2)``, ``(2a, sum)``, ``(+-e_i, 1)`` for each ``i``, and ``(0, -10p)``.

    The last row contributes ``(max(0, beta0) + 10p)^2``, which pushes the
    intercept to zero.  With label ``+10p`` the intercept could absorb that
    row and the optimum would fall below :func:`threshold` for every input.
    """
    if p is None:
        p = inst.p
    if p != inst.p:
        raise ValueError(f"instance has {inst.p} entries, expected p = {p}")
    if p < 1:
        raise ValueError("need at least one entry")
    a = np.array(inst.a, dtype=np.float64)
    eye = np.eye(p)
    units = np.stack([eye, -eye], axis=1).reshape(2 * p, p)  # e_1, -e_1, e_2, ...
    X = np.vstack([a, 2 * a, units, np.zeros(p)])
    y = np.concatenate([[inst.total / 2, inst.total], np.ones(2 * p), [-10.0 * p]])
    return from_arrays(X, y)


def check_feasibility_small(inst: SubsetSumInstance) -> bool:
    """Exhaustive ``2^p`` search for ``x in {+-1}^p`` with ``a.x = sum(a) / 2``."""
    if inst.p > MAX_DECIDE_P:
        raise ValueError(f"p = {inst.p} exceeds {MAX_DECIDE_P}")
    target2 = inst.total  # compare 2 a.x against sum(a) to stay in integers
    for signs in product((1, -1), repeat=inst.p):
        if 2 * sum(s * v for s, v in zip(signs, inst.a)) == target2:
            return True
    return False


def feasible_witness(inst: SubsetSumInstance):
    """First sign vector found by :func:`check_feasibility_small`, or ``None``."""
    if inst.p > MAX_DECIDE_P:
        raise ValueError(f"p = {inst.p} exceeds {MAX_DECIDE_P}")
    for signs in product((1, -1), repeat=inst.p):
        if 2 * sum(s * v for s, v in zip(signs, inst.a)) == inst.total:
            return signs
    return None
