"""Wall-clock benchmarking of the hybridization methods."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from os import PathLike
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from . import hybrid
from .core import HybridRankError, Method, RecommendationSet

_log = logging.getLogger(__name__)


class MissingBaselineError(HybridRankError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    method: Method
    n: int | None = None
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.SEMI_GENETIC and (self.n is None or self.n < 1):
            raise HybridRankError("semi-genetic benchmark configs need n >= 1")
        if not self.label:
            label = self.method.value if self.n is None else f"{self.method.value}(n={self.n})"
            object.__setattr__(self, "label", label)


def as_config(config: BenchConfig | tuple[str, Mapping[str, int]]) -> BenchConfig:
    """Accept a :class:`BenchConfig` or a ``(method, params)`` pair."""
    if isinstance(config, BenchConfig):
        return config
    method, params = config
    return BenchConfig(Method(method), **dict(params))


class BenchRow(NamedTuple):
    method: str
    repeat: int
    runtime_ns: int


class NormalizedRow(NamedTuple):
    method: str
    repeat: int
    relative_runtime: float


def _time_config(
    sets: Mapping[str, RecommendationSet],
    config: BenchConfig,
    seed: int,
    timer: Callable[[], int],
) -> int:
    start = timer()
    hybrid.hybridize_all(sets, config.method, config.n, seed)
    return timer() - start


def _time_config_default_timer(args) -> int:
    sets, config, seed = args
    return _time_config(sets, config, seed, time.perf_counter_ns)


def bench_methods(
    sets: Mapping[str, RecommendationSet],
    configs: Sequence[BenchConfig | tuple[str, Mapping[str, int]]],
    repeats: int,
    *,
    seed: int = 0,
    warmup: bool = True,
    parallel: int = 1,
    timer: Callable[[], int] = time.perf_counter_ns,
) -> list[BenchRow]:
    """Time hybridizing all users once per repeat and config.

    Only the hybridization of the already-built source lists is inside the
    timed region. Configs are interleaved within each repeat so slow drift
    in machine state affects all of them alike. One untimed warm-up pass per
    config runs first unless ``warmup`` is false.

    ``parallel > 1`` times runs on concurrent worker processes. The timings
    then compete for the machine and are only indicative.
    """
    if repeats < 1:
        raise HybridRankError(f"repeats must be positive, got {repeats}")
    configs = [as_config(c) for c in configs]
    if warmup:
        for config in configs:
            hybrid.hybridize_all(sets, config.method, config.n, seed)
    jobs = [(config, r, hybrid.derive_seed(seed, r)) for r in range(repeats) for config in configs]
    if parallel > 1:
        _log.warning("timing on %d concurrent workers; runtimes are only indicative", parallel)
        with ProcessPoolExecutor(parallel) as pool:
            times = list(pool.map(_time_config_default_timer, [(sets, c, s) for c, _, s in jobs]))
    else:
        times = [_time_config(sets, c, s, timer) for c, _, s in jobs]
    return [BenchRow(c.label, r, int(t)) for (c, r, _), t in zip(jobs, times)]


def normalize_to_baseline(rows: Sequence[BenchRow], baseline_method: str) -> list[NormalizedRow]:
    """Divide every runtime by the median runtime of ``baseline_method``."""
    baseline = [r.runtime_ns for r in rows if r.method == baseline_method]
    if not baseline:
        raise MissingBaselineError(f"no rows for baseline {baseline_method!r}")
    median = float(np.median(baseline))
    return [NormalizedRow(r.method, r.repeat, r.runtime_ns / median) for r in rows]


def summarize(rows: Sequence[BenchRow | NormalizedRow]) -> dict[str, dict[str, float]]:
    """Per-method min, quartiles and max of the runtime column."""
    by_method: dict[str, list[float]] = {}
    for row in rows:
        by_method.setdefault(row.method, []).append(float(row[2]))
    out = {}
    for method, values in by_method.items():
        q = np.percentile(values, [0, 25, 50, 75, 100])
        out[method] = dict(zip(("min", "q1", "median", "q3", "max"), q.tolist()))
    return out


def write_bench_csv(rows: Sequence[BenchRow], path: str | PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "repeat", "runtime_ns"])
        writer.writerows(rows)


def write_normalized_csv(rows: Sequence[NormalizedRow], path: str | PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "repeat", "relative_runtime"])
        for row in rows:
            writer.writerow([row.method, row.repeat, repr(row.relative_runtime)])
