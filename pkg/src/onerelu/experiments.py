"""Error metrics and the method-comparison benchmark over synthetic instances.

All metrics are plain sums over samples (not averaged by ``n``).
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .approx import sorting_method
from .core import Dataset, Params, _check_dim, relu_objective
from .heuristics import GdConfig, gradient_descent, iterative_heuristic, sgd
from .solver import SolverConfig
from .statgen import StatModelSpec, generate_instance

METHODS = ("sorting", "sorting+iter", "sorting+gd", "gd", "sgd")
CSV_FIELDS = ("p", "n", "sparsity", "db", "rho", "seed", "method", "pe", "obj", "re", "ge", "runtime_ms")
METRICS = ("pe", "obj", "re", "ge", "runtime_ms")


def prediction_error(train: Dataset, est: Params, truth: Params) -> float:
    """``sum_i (relu(x_i.est) - relu(x_i.truth))^2`` over the training rows."""
    _check_dim(train, est)
    _check_dim(train, truth)
    r = np.maximum(train.predict_linear(est), 0.0) - np.maximum(train.predict_linear(truth), 0.0)
    return float(r @ r)


def recovery_error(est: Params, truth: Params) -> float:
    """Euclidean distance between the weight vectors (intercepts excluded)."""
    if est.p != truth.p:
        raise ValueError(f"dimension mismatch: {est.p} vs {truth.p}")
    return float(np.linalg.norm(est.beta - truth.beta))


def generalization_error(test: Dataset, est: Params) -> float:
    return relu_objective(test, est)


@dataclass(frozen=True)
class MetricRow:
    p: int
    n: int
    sparsity: float
    db: float
    rho: float
    seed: int
    method: str
    pe: float
    obj: float
    re: float
    ge: float
    runtime_ms: float

    def as_record(self) -> dict:
        return {f: getattr(self, f) for f in CSV_FIELDS}


@dataclass(frozen=True)
class BenchConfig:
    N: int = 10
    iter_T: int = 20
    gd: GdConfig = GdConfig()
    solver: SolverConfig = SolverConfig()
    methods: tuple = METHODS

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods: {bad}")


def run_method(method: str, train: Dataset, cfg: BenchConfig, seed: int, cache: Optional[dict] = None) -> tuple[Params, float]:
    """Fit ``method``; returns (estimate, elapsed milliseconds).

    ``cache`` lets the sorting-seeded methods reuse one sorting run; its time
    is still charged to every method that depends on it.
    """
    cache = {} if cache is None else cache
    extra = 0.0
    if method.startswith("sorting"):
        if "sorting" not in cache:
            t0 = time.perf_counter()
            cache["sorting"] = sorting_method(train, cfg.N, cfg.solver).best.params
            cache["sorting_ms"] = 1e3 * (time.perf_counter() - t0)
        base, extra = cache["sorting"], cache["sorting_ms"]
    t0 = time.perf_counter()
    if method == "sorting":
        est = base
    elif method == "sorting+iter":
        est = iterative_heuristic(train, base, cfg.iter_T, cfg.solver).params
    elif method == "sorting+gd":
        est = gradient_descent(train, cfg.gd, base).params
    elif method == "gd":
        est = gradient_descent(train, cfg.gd).params
    else:
        est = sgd(train, cfg.gd, seed=seed).params
    return est, extra + 1e3 * (time.perf_counter() - t0)


def run_instance(spec: StatModelSpec, cfg: BenchConfig) -> list[MetricRow]:
    inst = generate_instance(spec)
    cache: dict = {}
    rows = []
    for method in cfg.methods:
        est, ms = run_method(method, inst.train, cfg, spec.seed, cache)
        rows.append(
            MetricRow(
                p=spec.p,
                n=spec.n,
                sparsity=spec.sparsity,
                db=spec.dB,
                rho=inst.rho,
                seed=spec.seed,
                method=method,
                pe=prediction_error(inst.train, est, inst.truth),
                obj=relu_objective(inst.train, est),
                re=recovery_error(est, inst.truth),
                ge=generalization_error(inst.test, est),
                runtime_ms=ms,
            )
        )
    return rows


def _run(args):
    return run_instance(*args)


def expand_grid(settings: Iterable[StatModelSpec], repetitions: int, base_seed: int = 0) -> list[StatModelSpec]:
    """One spec per setting and repetition, seeded ``base_seed + r``."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    return [replace(s, seed=base_seed + r) for s in settings for r in range(repetitions)]


def _row_key(r: MetricRow):
    return (r.p, r.n, r.sparsity, r.db, r.seed, METHODS.index(r.method))


def run_benchmark(
    settings: Sequence[StatModelSpec],
    repetitions: int = 1,
    cfg: Optional[BenchConfig] = None,
    base_seed: int = 0,
    jobs: int = 1,
) -> list[MetricRow]:
    """Every setting x seed x method; rows sorted so output is independent of ``jobs``."""
    cfg = cfg or BenchConfig()
    specs = expand_grid(settings, repetitions, base_seed)
    args = [(s, cfg) for s in specs]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run, args))
    else:
        batches = [_run(a) for a in args]
    return sorted((r for b in batches for r in b), key=_row_key)


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[MetricRow], include_runtime: bool = True) -> str:
    fields = CSV_FIELDS if include_runtime else CSV_FIELDS[:-1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        rec = r.as_record()
        w.writerow([_fmt(rec[f]) for f in fields])
    return buf.getvalue()


def aggregate(rows: Sequence[MetricRow]) -> list[dict]:
    """Per (setting, method) mean and population std of each metric."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.p, r.n, r.sparsity, r.db, r.rho, r.method), []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[:4], METHODS.index(k[5]))):
        grp = groups[key]
        rec = dict(zip(("p", "n", "sparsity", "db", "rho", "method"), key))
        rec["count"] = len(grp)
        for m in METRICS:
            vals = np.array([getattr(r, m) for r in grp])
            rec[f"mean_{m}"] = float(vals.mean())
            rec[f"std_{m}"] = float(vals.std())
        out.append(rec)
    return out


def aggregate_to_csv(table: Sequence[dict]) -> str:
    fields = ["p", "n", "sparsity", "db", "rho", "method", "count"]
    fields += [f"{s}_{m}" for m in METRICS for s in ("mean", "std")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for rec in table:
        w.writerow([_fmt(rec[f]) for f in fields])
    return buf.getvalue()


def win_rate(rows: Sequence[MetricRow], better: str, worse: str, metric: str = "obj", tol: float = 1e-9) -> float:
    """Fraction of instances where ``better`` scores at most ``worse`` (ties count as wins)."""
    by: dict = {}
    for r in rows:
        by.setdefault((r.p, r.n, r.sparsity, r.db, r.seed), {})[r.method] = getattr(r, metric)
    pairs = [(v[better], v[worse]) for v in by.values() if better in v and worse in v]
    if not pairs:
        raise ValueError(f"no instances with both {better!r} and {worse!r}")
    wins = sum(1 for a, b in pairs if a <= b + tol * max(1.0, abs(b)))
    return wins / len(pairs)


def mean_metric(rows: Sequence[MetricRow], method: str, metric: str = "obj") -> float:
    vals = [getattr(r, metric) for r in rows if r.method == method]
    if not vals:
        raise ValueError(f"no rows for {method!r}")
    return float(np.mean(vals))
