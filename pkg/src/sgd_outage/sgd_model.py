"""Load-sharing smart gateway diversity: from capacities and demand to SOP.

Under load sharing every user is served iff the gateways that are not in
outage jointly offer at least the total requested rate.  The system outage
probability (SOP) is the probability that they do not.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import pbd_core
from .errors import InfeasibleDemandError, SizeLimitError
from .pbd_core import MAX_ENUMERATION_N, as_outage_vector

#: Relative slack applied to r before taking its ceiling.
CEIL_RTOL = 1e-9


@dataclass(frozen=True)
class SgdScenario:
    gateway_capacities: tuple[float, ...]
    outage_probs: tuple[float, ...]
    user_demands: tuple[float, ...] = field(default=())
    total_demand: float | None = None

    def __post_init__(self) -> None:
        caps = tuple(float(c) for c in self.gateway_capacities)
        probs = tuple(float(x) for x in as_outage_vector(self.outage_probs))
        demands = tuple(float(d) for d in self.user_demands)
        if len(caps) != len(probs):
            raise ValueError(f"{len(caps)} capacities but {len(probs)} outage probabilities")
        if any(not math.isfinite(c) or c <= 0.0 for c in caps):
            raise ValueError("gateway capacities must be positive")
        if any(not math.isfinite(d) or d < 0.0 for d in demands):
            raise ValueError("user demands must be non-negative")
        if self.total_demand is None:
            total = math.fsum(demands)
        else:
            total = float(self.total_demand)
            if demands and not math.isclose(total, math.fsum(demands), rel_tol=1e-12):
                raise ValueError("total_demand disagrees with the sum of user demands")
        if not math.isfinite(total) or total <= 0.0:
            raise ValueError("total demand must be positive")
        object.__setattr__(self, "gateway_capacities", caps)
        object.__setattr__(self, "outage_probs", probs)
        object.__setattr__(self, "user_demands", demands)
        object.__setattr__(self, "total_demand", total)

    @classmethod
    def equal_capacity(cls, outage_probs: Sequence[float], capacity: float, total_demand: float) -> SgdScenario:
        probs = tuple(outage_probs)
        return cls(gateway_capacities=(capacity,) * len(probs), outage_probs=probs, total_demand=total_demand)

    @property
    def n_gateways(self) -> int:
        return len(self.gateway_capacities)

    @property
    def has_equal_capacities(self) -> bool:
        return len(set(self.gateway_capacities)) == 1

    @property
    def total_capacity(self) -> float:
        return math.fsum(self.gateway_capacities)


@dataclass(frozen=True)
class DemandRatio:
    r: float
    ceil_r: int
    threshold_L: int


@dataclass(frozen=True)
class TailResult:
    sop: float
    method: str
    threshold_L: int | None
    n_gateways: int

    @property
    def availability(self) -> float:
        return 1.0 - self.sop


@dataclass(frozen=True)
class ImprovementReport:
    base_sop: float
    extended_sop: float
    factor: float
    extra_gateways_K: int


def ceil_ratio(r: float) -> int:
    """Ceiling of r, snapping values within CEIL_RTOL of an integer onto it."""
    nearest = round(r)
    if nearest >= 1 and abs(r - nearest) <= CEIL_RTOL * nearest:
        return int(nearest)
    return math.ceil(r)


def threshold_from_demand(n_gateways: int, gw_capacity: float, total_demand: float) -> DemandRatio:
    """Outage threshold ``L = N - ceil(r) + 1`` with ``r = demand / capacity``."""
    if n_gateways < 1:
        raise ValueError("at least one gateway is required")
    if not gw_capacity > 0.0:
        raise ValueError("gateway capacity must be positive")
    if not total_demand > 0.0:
        raise ValueError("total demand must be positive")
    r = total_demand / gw_capacity
    ceil_r = ceil_ratio(r)
    if ceil_r > n_gateways:
        raise InfeasibleDemandError(
            f"demand {total_demand} needs {ceil_r} gateways but only {n_gateways} exist"
        )
    return DemandRatio(r=r, ceil_r=ceil_r, threshold_L=n_gateways - ceil_r + 1)


def _check_feasible(scenario: SgdScenario) -> None:
    if scenario.total_demand > scenario.total_capacity:
        raise InfeasibleDemandError(
            f"demand {scenario.total_demand} exceeds aggregate capacity {scenario.total_capacity}"
        )


def sop_equal_capacity(scenario: SgdScenario, method: str = "recursive") -> TailResult:
    """SOP of an equal-capacity scenario as P(S_N >= L).

    ``method`` selects the exact tail route from :data:`pbd_core.TAIL_METHODS`.
    """
    if not scenario.has_equal_capacities:
        raise ValueError("sop_equal_capacity needs identical gateway capacities")
    ratio = threshold_from_demand(scenario.n_gateways, scenario.gateway_capacities[0], scenario.total_demand)
    tail = pbd_core.TAIL_METHODS[method]
    sop = tail(scenario.outage_probs, ratio.threshold_L)
    return TailResult(sop=sop, method=method, threshold_L=ratio.threshold_L, n_gateways=scenario.n_gateways)


def sop_general(scenario: SgdScenario) -> TailResult:
    """SOP for arbitrary capacities by summing over failing outage sets.

    A set A of gateways in outage is failing when the capacity left over,
    ``sum_{j not in A} R_j``, is strictly below the demand.  O(2^N N).
    """
    n = scenario.n_gateways
    if n > MAX_ENUMERATION_N:
        raise SizeLimitError(f"general SOP enumeration supports N <= {MAX_ENUMERATION_N}, got {n}")
    _check_feasible(scenario)
    p = np.asarray(scenario.outage_probs)
    caps = np.asarray(scenario.gateway_capacities)
    shifts = np.arange(n, dtype=np.int64)
    chunk = 1 << min(n, 16)
    partial = []
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, start + chunk, dtype=np.int64)
        down = ((masks[:, None] >> shifts) & 1).astype(bool)
        remaining = np.where(down, 0.0, caps).sum(axis=1)
        failing = remaining < scenario.total_demand
        if failing.any():
            partial.append(float(np.where(down[failing], p, 1.0 - p).prod(axis=1).sum()))
    sop = min(max(math.fsum(partial), 0.0), 1.0)
    threshold = None
    if scenario.has_equal_capacities:
        threshold = threshold_from_demand(n, caps[0], scenario.total_demand).threshold_L
    return TailResult(sop=sop, method="general", threshold_L=threshold, n_gateways=n)


def sop_at(p: Sequence[float], ceil_r: int) -> float:
    """Equal-capacity SOP addressed directly by ceil(r)."""
    p = as_outage_vector(p)
    if not 1 <= ceil_r <= p.size:
        raise InfeasibleDemandError(f"ceil(r)={ceil_r} outside [1, {p.size}]")
    return pbd_core.tail_recursive(p, p.size - ceil_r + 1)


def improvement_factor(base: SgdScenario, extra_probs: Sequence[float]) -> ImprovementReport:
    """Generalized SOP-improvement factor of N + K gateways over N.

    All gateways share one capacity and the demand (hence ceil(r)) is the
    same for both systems, so the extended system needs ``L + K`` outages.
    """
    if not base.has_equal_capacities:
        raise ValueError("improvement factor needs identical gateway capacities")
    extra = () if len(extra_probs) == 0 else tuple(as_outage_vector(extra_probs))
    ratio = threshold_from_demand(base.n_gateways, base.gateway_capacities[0], base.total_demand)
    base_sop = pbd_core.tail_recursive(base.outage_probs, ratio.threshold_L)
    k = len(extra)
    extended_sop = pbd_core.tail_recursive(base.outage_probs + extra, ratio.threshold_L + k)
    if extended_sop == 0.0:
        raise ZeroDivisionError("extended system SOP is zero; the improvement factor is undefined")
    return ImprovementReport(base_sop=base_sop, extended_sop=extended_sop, factor=base_sop / extended_sop, extra_gateways_K=k)


def classical_improvement(p: Sequence[float]) -> float:
    """``p_1 / prod(p)``: one gateway versus all N with ceil(r) = 1."""
    p = as_outage_vector(p)
    return 1.0 / math.prod(p[1:].tolist())


def enumerate_failing_sets(scenario: SgdScenario) -> list[frozenset[int]]:
    """Explicit failing outage sets (0-based gateway indices), for small N."""
    n = scenario.n_gateways
    if n > MAX_ENUMERATION_N:
        raise SizeLimitError(f"enumeration supports N <= {MAX_ENUMERATION_N}, got {n}")
    out = []
    for size in range(n + 1):
        for down in itertools.combinations(range(n), size):
            left = math.fsum(c for j, c in enumerate(scenario.gateway_capacities) if j not in down)
            if left < scenario.total_demand:
                out.append(frozenset(down))
    return out
