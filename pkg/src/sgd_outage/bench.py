"""Wall-clock scaling of the exact tail algorithms."""

from __future__ import annotations

import statistics
import timeit
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .pbd_core import pmf_fft, tail_cfe, tail_recursive


@dataclass(frozen=True)
class Timing:
    method: str
    n: int
    threshold: int | None
    median_seconds: float


def _cases(n: int) -> list[tuple[str, int | None, Callable[[np.ndarray], object]]]:
    half = n // 2
    return [
        ("recursive_half", half, lambda p: tail_recursive(p, half)),
        ("recursive_one", 1, lambda p: tail_recursive(p, 1)),
        ("cfe", half, lambda p: tail_cfe(p, half)),
        ("fft_pmf", None, pmf_fft),
    ]


METHODS = ("recursive_half", "recursive_one", "cfe", "fft_pmf")


def time_call(fn: Callable[[], object], repetitions: int, min_seconds: float = 0.02) -> float:
    """Median seconds per call; fast calls are batched until a batch takes ``min_seconds``."""
    timer = timeit.Timer(fn)
    number = 1
    while True:
        if timer.timeit(number) >= min_seconds or number >= 1 << 20:
            break
        number *= 2
    runs = timer.repeat(repeat=repetitions, number=number)
    return statistics.median(runs) / number


def run_benchmark(
    n_values: Iterable[int],
    repetitions: int = 3,
    seed: int = 0,
    methods: Iterable[str] = METHODS,
) -> list[Timing]:
    wanted = set(methods)
    rng = np.random.Generator(np.random.Philox(seed))
    out = []
    for n in n_values:
        p = rng.random(n)
        for name, threshold, fn in _cases(n):
            if name in wanted:
                seconds = time_call(lambda: fn(p), repetitions)
                out.append(Timing(method=name, n=n, threshold=threshold, median_seconds=seconds))
    return out


def fit_slope(ns: Iterable[float], seconds: Iterable[float]) -> float:
    """Least-squares slope of log(seconds) against log(N)."""
    x = np.log(np.asarray(list(ns), dtype=float))
    y = np.log(np.asarray(list(seconds), dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def fitted_slopes(timings: Iterable[Timing]) -> dict[str, float]:
    by_method: dict[str, list[Timing]] = {}
    for t in timings:
        by_method.setdefault(t.method, []).append(t)
    return {
        name: fit_slope([t.n for t in rows], [t.median_seconds for t in rows])
        for name, rows in by_method.items()
        if len(rows) >= 2
    }
