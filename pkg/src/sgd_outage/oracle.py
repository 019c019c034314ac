"""Ground-truth engines used to certify the analytic SOP routines.

``enumerate_sop`` walks every outage pattern in plain Python and shares no
code with :mod:`sgd_outage.pbd_core` or :func:`sgd_model.sop_general`.
``simulate_sop`` draws Bernoulli link states and applies the load-sharing
rule trial by trial.

Random numbers come from numpy's Philox4x64 counter-based generator.  Trials
may be split into partitions; partition ``i`` draws from the ``i``-th child
of ``SeedSequence(seed)``, so an estimate depends only on
``(seed, n_trials, n_partitions)`` and not on how partitions are scheduled.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleDemandError, SizeLimitError
from .sgd_model import SgdScenario

MAX_ORACLE_N = 20

#: Trials drawn per block; fixed so results do not depend on memory settings.
BLOCK_TRIALS = 1 << 15


@dataclass(frozen=True)
class McConfig:
    n_trials: int
    seed: int = 0
    n_partitions: int = 1

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_partitions < 1:
            raise ValueError("n_partitions must be at least 1")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_error: float
    n_trials: int
    n_outages: int


def enumerate_sop(scenario: SgdScenario) -> float:
    """Exact SOP by iterating over all 2^N up/down patterns."""
    n = scenario.n_gateways
    if n > MAX_ORACLE_N:
        raise SizeLimitError(f"oracle enumeration supports N <= {MAX_ORACLE_N}, got {n}")
    caps = scenario.gateway_capacities
    probs = scenario.outage_probs
    demand = scenario.total_demand
    terms = []
    for pattern in itertools.product((False, True), repeat=n):
        available = 0.0
        weight = 1.0
        for down, cap, prob in zip(pattern, caps, probs):
            if down:
                weight *= prob
            else:
                weight *= 1.0 - prob
                available += cap
        if available < demand:
            terms.append(weight)
    return math.fsum(terms)


def _partition_sizes(n_trials: int, parts: int) -> list[int]:
    base, extra = divmod(n_trials, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _count_outages(seed_seq: np.random.SeedSequence, trials: int, probs: np.ndarray, caps: np.ndarray, demand: float) -> int:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    hits = 0
    done = 0
    while done < trials:
        block = min(BLOCK_TRIALS, trials - done)
        up = rng.random((block, probs.size)) >= probs
        hits += int(np.count_nonzero(up.astype(np.float64) @ caps < demand))
        done += block
    return hits


def simulate_sop(scenario: SgdScenario, cfg: McConfig, workers: int | None = None) -> McEstimate:
    """Monte Carlo SOP estimate with its binomial standard error.

    Each trial marks gateway ``n`` as down when ``u < p_n`` for a fresh
    uniform ``u`` and records an outage when the surviving capacity is below
    the demand.
    """
    if scenario.total_demand > scenario.total_capacity:
        raise InfeasibleDemandError("demand exceeds aggregate capacity")
    probs = np.asarray(scenario.outage_probs)
    caps = np.asarray(scenario.gateway_capacities)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_partitions)
    sizes = _partition_sizes(cfg.n_trials, cfg.n_partitions)

    def run(i: int) -> int:
        return _count_outages(children[i], sizes[i], probs, caps, scenario.total_demand)

    if workers and workers > 1 and cfg.n_partitions > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(cfg.n_partitions)))
    else:
        counts = [run(i) for i in range(cfg.n_partitions)]
    hits = sum(counts)
    p_hat = hits / cfg.n_trials
    return McEstimate(
        p_hat=p_hat,
        std_error=math.sqrt(p_hat * (1.0 - p_hat) / cfg.n_trials),
        n_trials=cfg.n_trials,
        n_outages=hits,
    )
