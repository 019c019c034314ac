"""Random-configuration studies: approximation error, SOP and improvement sweeps.

Configurations are drawn once at the widest gateway count a study needs and
every smaller N uses the leading entries of the same rows.  The systems
compared along N (or K) are therefore nested per configuration, which makes
the monotonicity in N and K hold configuration by configuration and not
only on average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .pbd_approx import APPROXIMATIONS, ApproxMethod, chernoff_range
from .pbd_core import as_outage_vector, tail_recursive
from .sgd_model import sop_at

Estimator = Callable[[Sequence[float], int], float]


@dataclass(frozen=True)
class RandomConfigSpec:
    n_configs: int = 1000
    n_gateways: int = 5
    prob_low: float = 0.0
    prob_high: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_configs < 1:
            raise ValueError("n_configs must be at least 1")
        if self.n_gateways < 1:
            raise ValueError("n_gateways must be at least 1")
        if not 0.0 <= self.prob_low < self.prob_high <= 1.0:
            raise ValueError("need 0 <= prob_low < prob_high <= 1")


@dataclass(frozen=True)
class ErrorReport:
    method: str
    n_gateways: int
    max_ae: float
    rmse: float
    mean_ae: float
    eval_set_size: int
    n_configs: int = 1


@dataclass(frozen=True)
class SweepRow:
    metric: str
    n_gateways: int
    value: float
    ceil_r: int | None = None
    extra_k: int | None = None
    method: str = ""
    n_used: int = 0
    n_censored: int = 0


def gen_random_configs(spec: RandomConfigSpec) -> list[np.ndarray]:
    """``n_configs`` outage vectors with i.i.d. U(prob_low, prob_high) entries."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    draws = rng.uniform(spec.prob_low, spec.prob_high, size=(spec.n_configs, spec.n_gateways))
    return [row for row in draws]


def _widest_configs(spec: RandomConfigSpec, width: int) -> list[np.ndarray]:
    return gen_random_configs(replace(spec, n_gateways=width))


def exact_tails(p: Sequence[float]) -> list[float]:
    """P(S_N >= L) for L = 0..N, by the recursive formula."""
    p = as_outage_vector(p)
    return [tail_recursive(p, L) for L in range(p.size + 1)]


def evaluation_set(p: Sequence[float], method: ApproxMethod | str) -> range:
    """Thresholds an approximation is scored on: 0..N, or floor(mu)+1..N for CB."""
    p = as_outage_vector(p)
    if method == ApproxMethod.CB or method == "CB":
        return chernoff_range(p)
    return range(p.size + 1)


def error_metrics(
    p: Sequence[float],
    method: ApproxMethod | str,
    estimator: Estimator | None = None,
    exact: Sequence[float] | None = None,
) -> ErrorReport:
    """maxAE, RMSE and MAE of an approximation against the exact tails.

    ``estimator`` overrides the approximation for ``method`` (useful to
    score arbitrary tail functions); ``exact`` may carry precomputed tails
    for L = 0..N.
    """
    p = as_outage_vector(p)
    label = method.value if isinstance(method, ApproxMethod) else str(method)
    if estimator is None:
        approx = APPROXIMATIONS[ApproxMethod(method)]

        def estimator(q: Sequence[float], L: int) -> float:
            res = approx(q, L)
            return res.value if res.applicable else math.nan

    if exact is None:
        exact = exact_tails(p)
    errors = []
    for L in evaluation_set(p, method):
        value = estimator(p, L)
        if not math.isnan(value):
            errors.append(abs(exact[L] - value))
    if not errors:
        raise ValueError(f"{label} has an empty evaluation set for this configuration")
    err = np.asarray(errors)
    return ErrorReport(
        method=label,
        n_gateways=p.size,
        max_ae=float(err.max()),
        rmse=math.sqrt(math.fsum(err * err) / err.size),
        mean_ae=math.fsum(err) / err.size,
        eval_set_size=err.size,
    )


def averaged_error_study(
    spec: RandomConfigSpec,
    n_range: Iterable[int],
    methods: Sequence[ApproxMethod | str] = tuple(ApproxMethod),
) -> list[ErrorReport]:
    """Per-N, per-method averages of the three error metrics over random configs."""
    n_values = sorted(set(n_range))
    methods = [ApproxMethod(m) for m in methods]
    configs = _widest_configs(spec, max(n_values))
    reports = []
    for n in n_values:
        per_method: dict[ApproxMethod, list[ErrorReport]] = {m: [] for m in methods}
        for row in configs:
            p = row[:n]
            exact = exact_tails(p)
            for m in methods:
                per_method[m].append(error_metrics(p, m, exact=exact))
        for m in methods:
            group = per_method[m]
            reports.append(
                ErrorReport(
                    method=m.value,
                    n_gateways=n,
                    max_ae=math.fsum(r.max_ae for r in group) / len(group),
                    rmse=math.fsum(r.rmse for r in group) / len(group),
                    mean_ae=math.fsum(r.mean_ae for r in group) / len(group),
                    eval_set_size=max(r.eval_set_size for r in group),
                    n_configs=len(group),
                )
            )
    return reports


def error_rows(reports: Iterable[ErrorReport]) -> list[SweepRow]:
    rows = []
    for rep in reports:
        for metric in ("max_ae", "rmse", "mean_ae"):
            rows.append(
                SweepRow(metric=metric, n_gateways=rep.n_gateways, value=getattr(rep, metric), method=rep.method, n_used=rep.n_configs)
            )
    return rows


def sop_sweep(spec: RandomConfigSpec, ceil_r_range: Iterable[int], n_range: Iterable[int]) -> list[SweepRow]:
    """Average SOP for every feasible (N, ceil(r)) cell; cells with ceil(r) > N are skipped."""
    n_values = sorted(set(n_range))
    r_values = sorted(set(ceil_r_range))
    configs = _widest_configs(spec, max(n_values))
    rows = []
    for n in n_values:
        for ceil_r in r_values:
            if not 1 <= ceil_r <= n:
                continue
            values = [sop_at(row[:n], ceil_r) for row in configs]
            rows.append(
                SweepRow(metric="sop", n_gateways=n, ceil_r=ceil_r, value=math.fsum(values) / len(values), n_used=len(values))
            )
    return rows


def improvement_sweep(
    spec: RandomConfigSpec,
    base_n: int,
    k_range: Iterable[int],
    ceil_r_range: Iterable[int] | None = None,
) -> list[SweepRow]:
    """Average generalized improvement factor for each (K, ceil(r)) cell.

    Configurations whose extended SOP underflows to zero are left out of the
    mean and counted in ``n_censored``.
    """
    k_values = sorted(set(k_range))
    if any(k < 0 for k in k_values):
        raise ValueError("K must be non-negative")
    r_values = sorted(set(ceil_r_range)) if ceil_r_range is not None else list(range(1, base_n + 1))
    configs = _widest_configs(spec, base_n + max(k_values))
    rows = []
    for k in k_values:
        for ceil_r in r_values:
            if not 1 <= ceil_r <= base_n:
                continue
            L = base_n - ceil_r + 1
            ratios = []
            censored = 0
            for row in configs:
                base = tail_recursive(row[:base_n], L)
                extended = tail_recursive(row[: base_n + k], L + k)
                if extended == 0.0:
                    censored += 1
                    continue
                ratios.append(base / extended)
            value = math.fsum(ratios) / len(ratios) if ratios else math.nan
            rows.append(
                SweepRow(
                    metric="improvement_factor",
                    n_gateways=base_n,
                    ceil_r=ceil_r,
                    extra_k=k,
                    value=value,
                    n_used=len(ratios),
                    n_censored=censored,
                )
            )
    return rows
