"""Datasets, parameters and the exact single-node ReLU objective.

Samples are stored in their original order.  The positive/negative label
split is carried as index arrays: ``pos_idx`` lists the samples with
``y > 0`` sorted (stably) by increasing ``y``, ``neg_idx`` lists the rest.
All indices are 0-based.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when feature dimensions disagree."""


@dataclass(frozen=True)
class Sample:
    x: tuple[float, ...]
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", float(self.y))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Params:
    """Candidate solution ``(beta, beta0)``.  Equality is exact and elementwise."""

    beta: np.ndarray
    beta0: float = 0.0

    def __post_init__(self):
        beta = _frozen(np.atleast_1d(self.beta))
        if beta.ndim != 1:
            raise DimensionError("beta must be a vector")
        if not (np.all(np.isfinite(beta)) and math.isfinite(self.beta0)):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta0", float(self.beta0))

    @classmethod
    def zeros(cls, p: int) -> "Params":
        return cls(np.zeros(p), 0.0)

    @classmethod
    def from_vector(cls, theta) -> "Params":
        """Inverse of :meth:`as_vector` (last entry is the intercept)."""
        theta = np.asarray(theta, dtype=np.float64)
        return cls(theta[:-1], float(theta[-1]))

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    def as_vector(self) -> np.ndarray:
        return np.append(self.beta, self.beta0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Params):
            return NotImplemented
        return self.beta0 == other.beta0 and np.array_equal(self.beta, other.beta)

    def __hash__(self) -> int:
        return hash((self.beta.tobytes(), self.beta0))

    def to_dict(self) -> dict:
        return {"beta": self.beta.tolist(), "beta0": self.beta0}


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    pos_idx: np.ndarray = field(repr=False)
    neg_idx: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.pos_idx.shape[0]

    @property
    def samples(self) -> list[Sample]:
        return [Sample(tuple(row), yi) for row, yi in zip(self.X, self.y)]

    @property
    def design(self) -> np.ndarray:
        """``[X | 1]``: rows ``a_i`` with ``a_i @ theta = x_i @ beta + beta0``."""
        return np.hstack([self.X, np.ones((self.n, 1))])

    def predict_linear(self, theta: Params) -> np.ndarray:
        _check_dim(self, theta)
        return self.X @ theta.beta + theta.beta0

    def subset(self, rows: Sequence[int]) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return from_arrays(self.X[rows], self.y[rows])


def _check_dim(d: Dataset, theta: Params) -> None:
    if theta.p != d.p:
        raise DimensionError(f"params have p={theta.p}, dataset has p={d.p}")


def from_arrays(X, y) -> Dataset:
    """Build a :class:`Dataset` from an ``(n, p)`` design and ``n`` labels."""
    X = np.array(X, dtype=np.float64)
    y = np.array(y, dtype=np.float64).reshape(-1)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError(f"X has shape {X.shape}, y has {y.shape[0]} entries")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionError("need n >= 1 and p >= 1")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("dataset contains non-finite values")
    pos = np.flatnonzero(y > 0)
    pos = pos[np.argsort(y[pos], kind="stable")]
    neg = np.flatnonzero(y <= 0)
    for a in (X, y, pos, neg):
        a.setflags(write=False)
    return Dataset(X, y, pos, neg)


def build_dataset(raw: Iterable[Sample]) -> Dataset:
    raw = list(raw)
    if not raw:
        raise DimensionError("need at least one sample")
    p = len(raw[0].x)
    if any(len(s.x) != p for s in raw):
        raise DimensionError("samples have different dimensions")
    return from_arrays([s.x for s in raw], [s.y for s in raw])


def augment_intercept(d: Dataset) -> Dataset:
    """Append a constant-1 feature so the intercept becomes the last coefficient."""
    return from_arrays(np.hstack([d.X, np.ones((d.n, 1))]), d.y)


def relu_objective(d: Dataset, theta: Params) -> float:
    """Unnormalized squared error ``sum_i (max(0, x_i.beta + beta0) - y_i)^2``."""
    r = np.maximum(d.predict_linear(theta), 0.0) - d.y
    return float(math.fsum(r * r)) if d.n > 10_000 else float(r @ r)


# -- CSV ---------------------------------------------------------------------

def write_csv(d: Dataset, path) -> None:
    """Write ``x0,...,x{p-1},y`` rows to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(d, path)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(d, fh)


def _write_rows(d: Dataset, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"x{j}" for j in range(d.p)] + ["y"])
    for row, yi in zip(d.X, d.y):
        w.writerow([repr(float(v)) for v in row] + [repr(float(yi))])


def read_csv(path) -> Dataset:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    p = len(header) - 1
    if p < 1 or header != [f"x{j}" for j in range(p)] + ["y"]:
        raise ValueError(f"{path}: expected header x0,...,x{{p-1}},y")
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != p + 1:
        raise DimensionError(f"{path}: ragged rows")
    return from_arrays(data[:, :p], data[:, p])
