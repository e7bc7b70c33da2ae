"""Command line front end: generate / solve / oracle / reduce / bench / bounds.

Exit codes: 0 ok, 2 bad input, 3 refused (size limit), 4 no convergence
under ``--strict``.  JSON outputs carry ``"schema": 1``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import fields

from . import __version__
from .approx import generalized_approx, sorting_method
from .core import Params, read_csv, relu_objective, write_csv
from .experiments import (
    METHODS,
    BenchConfig,
    aggregate,
    aggregate_to_csv,
    rows_to_csv,
    run_benchmark,
    win_rate,
)
from .hardness import SubsetSumInstance, reduce_to_relu, threshold
from .heuristics import GdConfig, gradient_descent, iterative_heuristic, sgd
from .oracle import OracleTooLarge, brute_force_opt
from .solver import SolverConfig
from .statgen import StatModelSpec, asymptotic_bracket, generate_instance

SCHEMA = 1
EXIT_OK, EXIT_BAD_INPUT, EXIT_REFUSED, EXIT_NONCONVERGED = 0, 2, 3, 4
SOLVE_METHODS = ("approx", "sorting", "iter", "gd", "sgd", "sorting+iter", "sorting+gd")
FEASIBLE_TOL = 1e-6


class NotConverged(RuntimeError):
    pass


def _emit(obj: dict, path: str | None = None) -> None:
    text = json.dumps({**obj, "schema": SCHEMA}, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _float_or_inf(s: str) -> float:
    if s.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(s)


# -- subcommands -------------------------------------------------------------

def cmd_generate(args) -> int:
    outs = args.output.split(",")
    if len(outs) != 3:
        raise ValueError("-o expects train.csv,test.csv,truth.json")
    spec = StatModelSpec(
        p=args.p,
        n=args.n,
        sparsity=args.sparsity,
        beta_star_mean=args.beta_mean,
        beta_star_var=args.beta_var,
        dB=args.db,
        realizable_rows=args.realizable_rows,
        seed=args.seed,
    )
    inst = generate_instance(spec)
    write_csv(inst.train, outs[0])
    write_csv(inst.test, outs[1])
    truth = inst.truth_dict(spec)
    truth.pop("schema")
    _emit(truth, outs[2])
    return EXIT_OK


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(max_iters=args.max_iters)


def _gd_cfg(args) -> GdConfig:
    return GdConfig(T=args.T, eps=args.eps, eta0=args.eta0, gamma_step=args.gamma_step, alpha=args.alpha, batch=args.batch)


def cmd_solve(args) -> int:
    d = read_csv(args.input)
    scfg = _solver_cfg(args)
    gcfg = _gd_cfg(args)
    t0 = time.perf_counter()
    extra: dict = {}
    m = args.method
    if m == "approx":
        res = generalized_approx(d, args.k, scfg, args.workers)
        rep = res.best
        extra = {"z_sigma": rep.value, "active_set": sorted(res.best_active), "candidates": res.candidates_evaluated}
    elif m in ("sorting", "sorting+iter", "sorting+gd"):
        res = sorting_method(d, args.splits, scfg, args.workers)
        rep = res.best
        if m == "sorting+iter":
            rep = iterative_heuristic(d, rep.params, args.iter_T, scfg)
        elif m == "sorting+gd":
            rep = gradient_descent(d, gcfg, rep.params)
    elif m == "iter":
        rep = iterative_heuristic(d, Params.zeros(d.p), args.iter_T, scfg)
    elif m == "gd":
        rep = gradient_descent(d, gcfg)
    else:
        rep = sgd(d, gcfg, seed=args.seed)
    ms = 1e3 * (time.perf_counter() - t0)
    _emit(
        {
            "method": m,
            "obj": relu_objective(d, rep.params),
            "params": rep.params.to_dict(),
            "iterations": rep.iterations,
            "converged": rep.converged,
            "runtime_ms": ms,
            **extra,
        },
        args.output,
    )
    if args.strict and not rep.converged:
        raise NotConverged(f"{m} did not converge")
    return EXIT_OK


def cmd_oracle(args) -> int:
    d = read_csv(args.input)
    rep = brute_force_opt(d, _solver_cfg(args), args.workers)
    _emit(
        {
            "z_opt": rep.value,
            "params": rep.params.to_dict(),
            "active_set": sorted(rep.active),
            "converged": rep.converged,
        },
        args.output,
    )
    if args.strict and not rep.converged:
        raise NotConverged("oracle subproblem did not converge")
    return EXIT_OK


def _parse_list(s: str) -> tuple:
    s = s.strip()
    if not s:
        return ()
    vals = []
    for tok in s.split(","):
        v = float(tok)
        if v != int(v):
            raise ValueError(f"non-integer entry {tok!r}")
        vals.append(int(v))
    return tuple(vals)


def cmd_reduce(args) -> int:
    inst = SubsetSumInstance(_parse_list(args.a))
    d = reduce_to_relu(inst)
    if args.output:
        write_csv(d, args.output)
    elif not args.decide:
        write_csv(d, sys.stdout)
    if args.decide:
        opt = brute_force_opt(d).value
        thr = threshold(inst.p)
        verdict = "FEASIBLE" if abs(opt - thr) <= FEASIBLE_TOL else "INFEASIBLE"
        print(f"{verdict} optimum={opt:.9g} threshold={thr}")
    return EXIT_OK


def _spec_from_json(obj: dict) -> StatModelSpec:
    known = {f.name for f in fields(StatModelSpec)}
    obj = dict(obj)
    aliases = {"db": "dB", "P": "sparsity", "beta_mean": "beta_star_mean", "beta_var": "beta_star_var"}
    for a, b in aliases.items():
        if a in obj:
            obj[b] = obj.pop(a)
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown setting keys: {sorted(unknown)}")
    if "dB" in obj:
        obj["dB"] = _float_or_inf(str(obj["dB"]))
    return StatModelSpec(**obj)


def load_bench_config(path: str) -> tuple[list, int, int, BenchConfig]:
    with open(path, encoding="utf-8") as fh:
        conf = json.load(fh)
    if not isinstance(conf, dict) or "settings" not in conf:
        raise ValueError("bench config needs a 'settings' list")
    settings = [_spec_from_json(s) for s in conf["settings"]]
    gd = GdConfig(**conf.get("gd", {}))
    cfg = BenchConfig(
        N=conf.get("N", 10),
        iter_T=conf.get("iter_T", 20),
        gd=gd,
        methods=tuple(conf.get("methods", METHODS)),
    )
    return settings, int(conf.get("repetitions", 1)), int(conf.get("base_seed", 0)), cfg


def cmd_bench(args) -> int:
    settings, reps, base_seed, cfg = load_bench_config(args.config)
    rows = run_benchmark(settings, reps, cfg, base_seed, args.jobs)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows, include_runtime=not args.no_runtime))
    if args.aggregate:
        with open(args.aggregate, "w", encoding="utf-8", newline="") as fh:
            fh.write(aggregate_to_csv(aggregate(rows)))
    summary = {"rows": len(rows), "win_rates": {}}
    for better, worse in (("sorting+gd", "gd"), ("sorting+iter", "sorting"), ("sorting", "gd")):
        if better in cfg.methods and worse in cfg.methods:
            summary["win_rates"][f"{better} <= {worse}"] = win_rate(rows, better, worse)
    _emit(summary)
    return EXIT_OK


def cmd_bounds(args) -> int:
    _emit(asymptotic_bracket(args.gamma, args.delta_sq).to_dict())
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_solver_flags(sp) -> None:
    sp.add_argument("--max-iters", type=int, default=SolverConfig.max_iters)
    sp.add_argument("--workers", type=int, default=1, help="processes for candidate solves")
    sp.add_argument("--strict", action="store_true", help="exit 4 if the solver did not converge")
    sp.add_argument("-o", "--output", help="write JSON here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="onerelu", description="Single-neuron ReLU regression tools.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthetic train/test instance from a planted model")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--sparsity", type=float, default=0.5)
    g.add_argument("--db", type=_float_or_inf, default=math.inf, help="signal-to-noise in dB, or inf")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--beta-mean", type=float, default=StatModelSpec.beta_star_mean)
    g.add_argument("--beta-var", type=float, default=StatModelSpec.beta_star_var)
    g.add_argument("--realizable-rows", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("-o", "--output", required=True, help="train.csv,test.csv,truth.json")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="fit one method to a CSV dataset")
    s.add_argument("--method", choices=SOLVE_METHODS, required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--splits", type=int, default=10)
    s.add_argument("--iter-T", type=int, default=20)
    gd = GdConfig()
    s.add_argument("--T", type=int, default=gd.T)
    s.add_argument("--eps", type=float, default=gd.eps)
    s.add_argument("--eta0", type=float, default=gd.eta0)
    s.add_argument("--gamma-step", type=float, default=gd.gamma_step)
    s.add_argument("--alpha", type=float, default=gd.alpha)
    s.add_argument("--batch", type=int, default=None)
    s.add_argument("--seed", type=int, default=0, help="SGD batch sampling seed")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exact optimum by exhausting active sets (m <= 20)")
    o.add_argument("--input", required=True)
    _add_solver_flags(o)
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("reduce", help="subset-sum instance to a regression instance")
    r.add_argument("--a", required=True, help="comma separated nonnegative integers")
    r.add_argument("-o", "--output")
    r.add_argument("--decide", action="store_true", help="run the oracle and print FEASIBLE/INFEASIBLE")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bench", help="method comparison over a grid of synthetic settings")
    b.add_argument("--config", required=True)
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--aggregate", help="also write per-setting means and stds here")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--no-runtime", action="store_true", help="drop runtime_ms for byte-stable output")
    b.set_defaults(func=cmd_bench)

    bd = sub.add_parser("bounds", help="asymptotic objective bracket")
    bd.add_argument("--gamma", type=float, required=True)
    bd.add_argument("--delta-sq", type=float, required=True)
    bd.set_defaults(func=cmd_bounds)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OracleTooLarge as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
