"""Grid search over the population size and runtime-constrained selection."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from os import PathLike
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .core import HybridRankError, Method, RecommendationSet
from .hybrid import derive_seed, hybridize_all
from .metrics import Holdout, map_at_k

_log = logging.getLogger(__name__)

DEFAULT_GRID = tuple(range(1000, 40001, 1000))
DEFAULT_REPEATS = 50


class NoFeasibleNError(HybridRankError):
    pass


@dataclass(frozen=True)
class GridResult:
    n: int
    map_scores: tuple[float, ...]
    runtimes_ns: tuple[int, ...]
    median_map: float
    ci95_low: float
    ci95_high: float
    median_runtime_ns: float

    @classmethod
    def from_runs(cls, n: int, scores: Sequence[float], runtimes: Sequence[int]) -> GridResult:
        # percentile interval over repeats; linear interpolation keeps the median inside it
        low, mid, high = np.percentile(scores, [2.5, 50.0, 97.5])
        return cls(
            n,
            tuple(float(s) for s in scores),
            tuple(int(t) for t in runtimes),
            float(mid),
            float(low),
            float(high),
            float(np.median(runtimes)),
        )


def repeat_seed(base_seed: int, n: int, repeat: int) -> int:
    """Seed of repeat ``repeat`` at population size ``n``."""
    return derive_seed(base_seed, n, repeat)


def _run_once(
    sets: Mapping[str, RecommendationSet],
    holdouts: Mapping[str, Holdout],
    n: int,
    seed: int,
    k: int,
    timer: Callable[[], int],
) -> tuple[float, int]:
    start = timer()
    ensembles = hybridize_all(sets, Method.SEMI_GENETIC, n, seed)
    elapsed = timer() - start
    return map_at_k(ensembles, holdouts, k).map_at_k, elapsed


_worker: dict = {}


def _init_worker(sets, holdouts, k) -> None:
    _worker.update(sets=sets, holdouts=holdouts, k=k)


def _run_task(task: tuple[int, int]) -> tuple[float, int]:
    n, seed = task
    return _run_once(_worker["sets"], _worker["holdouts"], n, seed, _worker["k"], time.perf_counter_ns)


def grid_search(
    sets: Mapping[str, RecommendationSet],
    holdouts: Mapping[str, Holdout],
    grid: Iterable[int] = DEFAULT_GRID,
    repeats: int = DEFAULT_REPEATS,
    k: int = 1000,
    base_seed: int = 0,
    *,
    jobs: int = 1,
    timer: Callable[[], int] = time.perf_counter_ns,
) -> list[GridResult]:
    """Evaluate semi-genetic hybridization for every ``n`` in ``grid``.

    Each (n, repeat) run hybridizes all users with seed
    ``repeat_seed(base_seed, n, repeat)``, scores MAP@k, and times only the
    hybridization. With ``jobs > 1`` runs execute in worker processes and
    their runtimes overlap, so only use that when runtimes do not matter.
    """
    grid = sorted(set(grid))
    if not grid:
        raise HybridRankError("grid is empty")
    if repeats < 1:
        raise HybridRankError(f"repeats must be positive, got {repeats}")
    tasks = [(n, repeat_seed(base_seed, n, r)) for n in grid for r in range(repeats)]
    if jobs > 1:
        _log.warning("timing %d runs on %d concurrent workers; runtimes are not comparable", len(tasks), jobs)
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(sets, holdouts, k)) as pool:
            outcomes = list(pool.map(_run_task, tasks, chunksize=max(1, repeats // jobs)))
    else:
        outcomes = []
        for n, seed in tasks:
            outcomes.append(_run_once(sets, holdouts, n, seed, k, timer))
            _log.debug("n=%d seed=%d map=%.5f", n, seed, outcomes[-1][0])
    results = []
    for i, n in enumerate(grid):
        chunk = outcomes[i * repeats : (i + 1) * repeats]
        results.append(GridResult.from_runs(n, [s for s, _ in chunk], [t for _, t in chunk]))
    return results


def select_n(results: Sequence[GridResult], baseline_runtimes: Sequence[float]) -> int:
    """Best median MAP among configurations no slower than the fastest baseline run.

    A configuration qualifies when its median runtime is at most the minimum
    baseline runtime. Equal medians go to the smaller ``n``.
    """
    if not results or not len(baseline_runtimes):
        raise HybridRankError("select_n needs grid results and baseline runtimes")
    budget = min(baseline_runtimes)
    feasible = [r for r in results if r.median_runtime_ns <= budget]
    if not feasible:
        fastest = min(r.median_runtime_ns for r in results)
        raise NoFeasibleNError(
            f"no population size meets the runtime budget {budget:.0f} ns "
            f"(fastest configuration median {fastest:.0f} ns)"
        )
    return min(feasible, key=lambda r: (-r.median_map, r.n)).n


def best_n(results: Sequence[GridResult]) -> int:
    """Best median MAP ignoring runtime; ties go to the smaller ``n``."""
    return min(results, key=lambda r: (-r.median_map, r.n)).n


def write_grid_csv(results: Sequence[GridResult], path: str | PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "repeat", "map", "runtime_ns"])
        for res in results:
            for r, (score, runtime) in enumerate(zip(res.map_scores, res.runtimes_ns)):
                writer.writerow([res.n, r, repr(score), runtime])


def write_grid_summary_csv(results: Sequence[GridResult], path: str | PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "median_map", "ci_low", "ci_high", "median_runtime_ns"])
        for res in results:
            writer.writerow(
                [res.n, repr(res.median_map), repr(res.ci95_low), repr(res.ci95_high), res.median_runtime_ns]
            )
