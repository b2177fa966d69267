"""Semi-genetic hybridization and the weighted-vote baseline.

The semi-genetic method treats every (source list, item) pair as a chromosome
whose fitness is its reciprocal rank, draws ``n`` chromosomes with
replacement proportionally to fitness, and ranks items by how often they were
drawn. There is exactly one selection pass: no cross-over, no mutation, no
further generations.

Randomness comes from ``numpy.random.Generator(PCG64(seed))``. PCG64's bit
stream and ``Generator.random`` are stable across numpy releases, so the same
seed reproduces the same ensemble across processes and platforms.
"""
from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass
from itertools import chain
from operator import itemgetter
from typing import Callable, Mapping

import numpy as np

from .core import Ensemble, HybridRankError, Method, RankedList, RecommendationSet

__all__ = [
    "EmptyPoolError",
    "ZeroPopulationError",
    "FitnessPool",
    "Population",
    "reciprocal_rank",
    "assign_fitness",
    "select_population",
    "rank_by_frequency",
    "semi_genetic_hybrid",
    "weighted_vote_hybrid",
    "make_rng",
    "derive_seed",
    "hybridize_all",
]

FitnessFn = Callable[[RankedList], np.ndarray]


class EmptyPoolError(HybridRankError):
    pass


class ZeroPopulationError(HybridRankError):
    pass


_reciprocals = 1.0 / np.arange(1, 1025, dtype=np.float64)


def reciprocal_rank(ranked: RankedList) -> np.ndarray:
    """Fitness ``1 / p`` for the item at 1-based position ``p``."""
    global _reciprocals
    size = len(ranked)
    if size > len(_reciprocals):
        _reciprocals = 1.0 / np.arange(1, 2 * size + 1, dtype=np.float64)
    return _reciprocals[:size]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class FitnessPool:
    """Multiset of ``(item, fitness, source_index)`` chromosomes.

    Entries are laid out source by source, each source in rank order, so the
    entry index itself orders entries by ``(source_index, rank)``. ``codes``
    maps every entry to the index of the first entry holding the same item;
    that is how duplicates across sources are merged at counting time.
    """

    items: tuple[str, ...]
    fitness: np.ndarray
    source_index: np.ndarray
    codes: np.ndarray
    total_fitness: float
    user: str = ""

    def __len__(self) -> int:
        return len(self.items)

    @property
    def entries(self) -> list[tuple[str, float, int]]:
        return list(zip(self.items, self.fitness.tolist(), self.source_index.tolist()))

    def item_fitness(self) -> np.ndarray:
        """Summed fitness per item, stored at the item's first entry index."""
        return np.bincount(self.codes, weights=self.fitness, minlength=len(self.items))


@dataclass(frozen=True, eq=False)
class Population:
    """The ``n`` chromosomes drawn from a pool, as pool entry indices."""

    draws: np.ndarray
    n: int

    def multiset(self, pool: FitnessPool) -> Counter[str]:
        """Drawn items with counts; draws of the same item from different entries merge."""
        counts = np.bincount(pool.codes[self.draws], minlength=len(pool))
        return Counter({pool.items[i]: int(counts[i]) for i in np.flatnonzero(counts)})


def assign_fitness(rs: RecommendationSet, fitness: FitnessFn = reciprocal_rank) -> FitnessPool:
    """Build the chromosome pool for ``rs``.

    Args:
        rs: Source lists for one user.
        fitness: Maps a ranked list to per-position fitness values. Reciprocal
            rank by default; a comparable item score may be substituted.
    """
    lists = rs.lists
    items = tuple(chain.from_iterable(lst.items for lst in lists))
    m = len(items)
    values = np.concatenate([np.asarray(fitness(lst), dtype=np.float64) for lst in lists])
    if values.shape != (m,) or np.any(values < 0) or not np.all(np.isfinite(values)):
        raise HybridRankError("fitness must be finite, non-negative and one value per item")
    source_index = np.repeat(np.arange(len(lists)), [len(lst) for lst in lists])
    # reversed so the earliest entry of each item wins
    first = dict(zip(reversed(items), range(m - 1, -1, -1)))
    codes = np.fromiter(map(first.__getitem__, items), dtype=np.intp, count=m)
    return FitnessPool(items, values, source_index, codes, float(values.sum()), rs.user)


def select_population(pool: FitnessPool, n: int, seed: int) -> Population:
    """Draw ``n`` entries with replacement, each with probability fitness / total.

    Sampling inverts the cumulative fitness: one uniform per draw, located by
    binary search. Zero-fitness entries occupy an empty interval and are never
    drawn. The uniforms are sorted first, which leaves the multiset of draws
    unchanged and makes the search cache friendly for large ``n``.
    """
    if len(pool) == 0 or pool.total_fitness <= 0:
        raise EmptyPoolError("cannot select from an empty pool")
    if n < 1:
        raise ZeroPopulationError(f"population size must be positive, got {n}")
    cumulative = np.cumsum(pool.fitness)
    targets = make_rng(seed).random(n)
    targets.sort()
    targets *= cumulative[-1]
    draws = np.searchsorted(cumulative, targets, side="right")
    # u * total can round up to total itself
    np.minimum(draws, len(pool) - 1, out=draws)
    return Population(draws, n)


def rank_by_frequency(
    pop: Population,
    pool: FitnessPool,
    *,
    seed: int | None = None,
    pad: bool = False,
) -> Ensemble:
    """Order drawn items by draw count.

    Ties fall back to summed fitness (descending), then to the item's first
    appearance by (source index, rank). Items never drawn are left out unless
    ``pad`` is set, in which case they follow with score 0 in fitness order.
    """
    m = len(pool)
    counts = np.bincount(pool.codes[pop.draws], minlength=m)
    totals = pool.item_fitness()
    drawn = np.flatnonzero(counts)
    # lexsort is stable and ``drawn`` ascends by entry index, covering the last tie-break
    order = drawn[np.lexsort((-totals[drawn], -counts[drawn]))]
    entries = list(zip(map(pool.items.__getitem__, order.tolist()), counts[order].tolist()))
    if pad:
        firsts = np.flatnonzero(pool.codes == np.arange(m))
        undrawn = firsts[counts[firsts] == 0]
        undrawn = undrawn[np.argsort(-totals[undrawn], kind="stable")]
        entries.extend((pool.items[i], 0) for i in undrawn.tolist())
    return Ensemble(pool.user, entries, Method.SEMI_GENETIC, seed=seed, n=pop.n)


def semi_genetic_hybrid(
    rs: RecommendationSet,
    n: int,
    seed: int,
    *,
    pad: bool = False,
    fitness: FitnessFn = reciprocal_rank,
) -> Ensemble:
    """Fuse the lists in ``rs`` with a single fitness-proportional selection pass.

    Example:
        >>> rs = RecommendationSet.from_items("u1", [["a"], ["a"]])
        >>> semi_genetic_hybrid(rs, n=10, seed=1).entries
        (('a', 10),)
    """
    if n < 1:
        raise ZeroPopulationError(f"population size must be positive, got {n}")
    pool = assign_fitness(rs, fitness)
    pop = select_population(pool, n, seed)
    return rank_by_frequency(pop, pool, seed=seed, pad=pad)


def weighted_vote_hybrid(rs: RecommendationSet) -> Ensemble:
    """Rank items by the number of source lists that contain them.

    Equal vote counts keep the order of first appearance scanning sources
    best-first and each source top-down. Counter preserves insertion order
    and ``sorted`` is stable under ``reverse=True``, which gives exactly that.
    """
    votes = Counter(chain.from_iterable(lst.items for lst in rs.lists))
    entries = sorted(votes.items(), key=itemgetter(1), reverse=True)
    return Ensemble(rs.user, entries, Method.WEIGHTED_VOTE)


_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(*parts: int | str) -> int:
    """Deterministic 64-bit seed from integers and strings.

    Strings enter through CRC-32 of their UTF-8 bytes, integers modulo 2**64;
    each part is xor-ed into the state and mixed with one SplitMix64 step.
    """
    state = 0
    for part in parts:
        value = zlib.crc32(part.encode("utf-8")) if isinstance(part, str) else int(part) & _MASK64
        state = _splitmix64(state ^ value)
    return state


def hybridize_all(
    sets: Mapping[str, RecommendationSet],
    method: Method | str,
    n: int | None = None,
    seed: int = 0,
    *,
    pad: bool = False,
) -> dict[str, Ensemble]:
    """Hybridize every user's sources; semi-genetic users get ``derive_seed(seed, user)``."""
    method = Method(method)
    if method is Method.WEIGHTED_VOTE:
        return {user: weighted_vote_hybrid(rs) for user, rs in sets.items()}
    if n is None:
        raise ZeroPopulationError("semi-genetic hybridization needs a population size n")
    return {
        user: semi_genetic_hybrid(rs, n, derive_seed(seed, user), pad=pad)
        for user, rs in sets.items()
    }
