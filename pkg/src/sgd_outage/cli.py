"""Command-line front end.

Exit codes: 0 success, 2 unreadable or invalid input, 3 infeasible scenario
or invalid grid, 4 method limits (size caps, equal-capacity-only methods),
5 numerical consistency failure.  Tables go to stdout (or ``--out``), all
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .bench import METHODS as BENCH_METHODS
from .bench import fitted_slopes, run_benchmark
from .errors import InfeasibleDemandError, InternalConsistencyError, ScenarioError, SizeLimitError
from .experiments import averaged_error_study, improvement_sweep, sop_sweep
from .pbd_approx import ApproxMethod, approximate, tv_binomial, tv_poisson
from .pbd_core import TAIL_METHODS
from .scenario_io import (
    OutputTable,
    experiment_from_document,
    extra_gateways_from_document,
    load_document,
    scenario_from_document,
)
from .sgd_model import improvement_factor, sop_equal_capacity, sop_general, threshold_from_demand

OUT_DIR_ENV = "SGD_OUTAGE_OUT_DIR"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_LIMIT = 4
EXIT_NUMERIC = 5

STUDY_FILES = {"errors": "errors.csv", "sop-sweep": "sop_sweep.csv", "improve-sweep": "improve_sweep.csv"}


class GridError(ValueError):
    pass


def _emit(table: OutputTable, fmt: str, out: str | None, default_name: str) -> None:
    text = table.render(fmt)
    target = out or os.environ.get(OUT_DIR_ENV)
    if not target:
        sys.stdout.write(text)
        return
    path = Path(target)
    if path.is_dir() or not path.suffix:
        path.mkdir(parents=True, exist_ok=True)
        stem = Path(default_name).stem
        path = path / f"{stem}.{'json' if fmt == 'json' else 'csv'}"
    path.write_text(text)
    print(f"wrote {path}", file=sys.stderr)


def _metadata(**extra: object) -> dict[str, object]:
    return {"tool": f"sgd-outage {__version__}", **extra}


def cmd_sop(args: argparse.Namespace) -> int:
    doc = load_document(args.scenario)
    scenario = scenario_from_document(doc)
    method = args.method
    equal = scenario.has_equal_capacities
    if method != "general" and not equal:
        raise SizeLimitError(f"method '{method}' needs equal gateway capacities; use --method general")

    start = time.perf_counter()
    if method == "general":
        result = sop_general(scenario)
    else:
        result = sop_equal_capacity(scenario, method=method)
    elapsed = time.perf_counter() - start

    r = ceil_r = None
    if equal:
        ratio = threshold_from_demand(scenario.n_gateways, scenario.gateway_capacities[0], scenario.total_demand)
        r, ceil_r = ratio.r, ratio.ceil_r

    columns = ["method", "n_gateways", "r", "ceil_r", "L", "sop", "availability"]
    row = [method, scenario.n_gateways, r, ceil_r, result.threshold_L, result.sop, result.availability]
    extra = extra_gateways_from_document(doc)
    if extra is not None:
        caps, probs = extra
        if not equal or any(c != scenario.gateway_capacities[0] for c in caps):
            raise SizeLimitError("improvement factor needs every gateway, extra ones included, at one capacity")
        report = improvement_factor(scenario, probs)
        columns += ["extra_gateways_K", "extended_sop", "improvement_factor"]
        row += [report.extra_gateways_K, report.extended_sop, report.factor]

    table = OutputTable(columns=columns, metadata=_metadata(seed=None, method=method))
    table.add(*row)
    _emit(table, args.format, args.out, "sop")
    print(f"sop={result.sop:.6g} method={method} wall_clock={elapsed:.6f}s", file=sys.stderr)
    return EXIT_OK


def cmd_approx(args: argparse.Namespace) -> int:
    doc = load_document(args.scenario)
    scenario = scenario_from_document(doc)
    if not scenario.has_equal_capacities:
        raise SizeLimitError("approximations need equal gateway capacities")
    ratio = threshold_from_demand(scenario.n_gateways, scenario.gateway_capacities[0], scenario.total_demand)
    L = ratio.threshold_L
    p = scenario.outage_probs
    exact = sop_equal_capacity(scenario).sop

    methods = [ApproxMethod(m.strip().upper()) for m in args.methods.split(",") if m.strip()]
    binom_tv = tv_binomial(p)
    pois_tv = tv_poisson(p)
    table = OutputTable(
        columns=["method", "L", "value", "applicable", "exact", "abs_error", "tv_distance", "tv_bound", "bound_kind"],
        metadata=_metadata(seed=None, method=",".join(m.value for m in methods)),
    )
    for m in methods:
        res = approximate(m, p, L)
        err = abs(res.value - exact) if res.applicable else None
        tv = binom_tv if m is ApproxMethod.BA else pois_tv if m is ApproxMethod.PA else None
        table.add(
            m.value,
            L,
            res.value if res.applicable else None,
            res.applicable,
            exact,
            err,
            tv.tv_distance if tv else None,
            tv.bound if tv else None,
            tv.bound_kind.value if tv else None,
        )
    _emit(table, args.format, args.out, "approx")
    return EXIT_OK


def _check_grid(values: Sequence[int], name: str, minimum: int) -> None:
    if not values or any(v < minimum for v in values):
        raise GridError(f"grid '{name}' must be non-empty with values >= {minimum}")


def cmd_study(args: argparse.Namespace) -> int:
    doc = load_document(args.spec)
    spec, grids = experiment_from_document(doc)
    if args.seed is not None or args.n_configs is not None:
        spec = replace(
            spec,
            seed=spec.seed if args.seed is None else args.seed,
            n_configs=spec.n_configs if args.n_configs is None else args.n_configs,
        )
    meta = _metadata(seed=spec.seed, method=args.which, n_configs=spec.n_configs, prob_low=spec.prob_low, prob_high=spec.prob_high)

    if args.which == "errors":
        _check_grid(grids.n, "n", 1)
        reports = averaged_error_study(spec, grids.n)
        table = OutputTable(columns=["method", "n_gateways", "max_ae", "rmse", "mean_ae", "eval_set_size", "n_configs"], metadata=meta)
        for rep in reports:
            table.add(rep.method, rep.n_gateways, rep.max_ae, rep.rmse, rep.mean_ae, rep.eval_set_size, rep.n_configs)
        for n in sorted(set(grids.n)):
            ranked = sorted((r for r in reports if r.n_gateways == n), key=lambda r: r.mean_ae)
            print(f"N={n}: ascending mean error " + " < ".join(r.method for r in ranked), file=sys.stderr)
    elif args.which == "sop-sweep":
        _check_grid(grids.n, "n", 1)
        ceil_grid = grids.ceil_r_for(max(grids.n))
        _check_grid(ceil_grid, "ceil_r", 1)
        rows = sop_sweep(spec, ceil_grid, grids.n)
        if not rows:
            raise GridError("sop sweep grid has no feasible (N, ceil_r) cell")
        table = OutputTable(columns=["n_gateways", "ceil_r", "L", "sop", "n_configs"], metadata=meta)
        for row in rows:
            table.add(row.n_gateways, row.ceil_r, row.n_gateways - row.ceil_r + 1, row.value, row.n_used)
        lo = min(rows, key=lambda r: r.value)
        hi = max(rows, key=lambda r: r.value)
        print(f"min sop {lo.value:.3e} at N={lo.n_gateways} ceil_r={lo.ceil_r}; "
              f"max sop {hi.value:.3e} at N={hi.n_gateways} ceil_r={hi.ceil_r}", file=sys.stderr)
    else:
        _check_grid(grids.k, "k", 0)
        _check_grid([grids.base_n], "base_n", 1)
        ceil_grid = grids.ceil_r_for(grids.base_n)
        _check_grid(ceil_grid, "ceil_r", 1)
        rows = improvement_sweep(spec, grids.base_n, grids.k, ceil_grid)
        if not rows:
            raise GridError("improvement sweep grid has no feasible (K, ceil_r) cell")
        table = OutputTable(
            columns=["base_n", "extra_k", "ceil_r", "improvement_factor", "n_used", "n_censored"], metadata=meta
        )
        for row in rows:
            table.add(row.n_gateways, row.extra_k, row.ceil_r, row.value, row.n_used, row.n_censored)
        finite = [r for r in rows if r.n_used]
        if finite:
            hi = max(finite, key=lambda r: r.value)
            lo = min(finite, key=lambda r: r.value)
            print(f"min I_g {lo.value:.3e} at K={lo.extra_k} ceil_r={lo.ceil_r}; "
                  f"max I_g {hi.value:.3e} at K={hi.extra_k} ceil_r={hi.ceil_r}", file=sys.stderr)
    _emit(table, args.format, args.out, STUDY_FILES[args.which])
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    n_values = []
    n = args.n_min
    while n <= args.n_max:
        n_values.append(n)
        n *= 2
    if len(n_values) < 2:
        raise GridError("bench needs at least two sizes between --n-min and --n-max")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - set(BENCH_METHODS)
    if unknown:
        raise GridError(f"unknown bench method(s) {sorted(unknown)}")
    timings = run_benchmark(n_values, repetitions=args.repetitions, seed=args.seed, methods=methods)
    slopes = fitted_slopes(timings)
    meta = _metadata(seed=args.seed, method=",".join(methods), repetitions=args.repetitions)
    meta.update({f"slope_{k}": v for k, v in slopes.items()})
    table = OutputTable(columns=["method", "n", "L", "median_seconds"], metadata=meta)
    for t in timings:
        table.add(t.method, t.n, t.threshold, t.median_seconds)
    for name, slope in slopes.items():
        print(f"{name}: fitted log-log slope {slope:.3f}", file=sys.stderr)
    _emit(table, args.format, args.out, "bench")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgd-outage", description="System outage probability of gateway-diversity satellite networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help=f"output file or directory (default: stdout, or ${OUT_DIR_ENV})")

    s = sub.add_parser("sop", help="exact SOP of a scenario")
    s.add_argument("scenario")
    s.add_argument("--method", choices=(*TAIL_METHODS, "general"), default="recursive")
    common(s)
    s.set_defaults(func=cmd_sop)

    a = sub.add_parser("approx", help="approximations of the SOP against the exact value")
    a.add_argument("scenario")
    a.add_argument("--methods", default=",".join(m.value for m in ApproxMethod), help="comma-separated subset of BA,PA,NA,RNA,CB")
    common(a)
    a.set_defaults(func=cmd_approx)

    st = sub.add_parser("study", help="random-configuration studies")
    st.add_argument("spec")
    st.add_argument("--which", choices=tuple(STUDY_FILES), default="errors")
    st.add_argument("--seed", type=int, default=None)
    st.add_argument("--n-configs", type=int, default=None)
    common(st)
    st.set_defaults(func=cmd_study)

    b = sub.add_parser("bench", help="timing scaling of the exact methods")
    b.add_argument("--n-min", type=int, default=256)
    b.add_argument("--n-max", type=int, default=4096)
    b.add_argument("--repetitions", type=int, default=3)
    b.add_argument("--methods", default=",".join(BENCH_METHODS))
    b.add_argument("--seed", type=int, default=0)
    common(b)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleDemandError, GridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (InternalConsistencyError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
