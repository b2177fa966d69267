"""MAP@k over left-out items and the cumulative rank-position distribution."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from os import PathLike
from typing import Mapping, Sequence, Union

import numpy as np

from .core import Ensemble, HybridRankError, RankedList

Ranking = Union[Ensemble, RankedList, Sequence[str]]
Holdout = Union[str, Sequence[str]]


class IdenticalHoldoutError(HybridRankError):
    pass


class EmptyUserSetError(HybridRankError):
    pass


def _items(ranking: Ranking) -> Sequence[str]:
    if isinstance(ranking, (Ensemble, RankedList)):
        return ranking.items
    return ranking


def _rank_within(items: Sequence[str], item: str, k: int) -> int | None:
    try:
        return items.index(item, 0, k) + 1
    except ValueError:
        return None


def average_precision(ranking: Ranking, holdout: Holdout, k: int) -> float:
    """Average precision of ``ranking[:k]`` against one or more left-out items.

    Found items are sorted by rank; the j-th hit at rank ``r_j`` contributes
    ``j / r_j`` and the sum is divided by the number of left-out items. Items
    outside the top ``k`` contribute nothing. With a single left-out item this
    is ``1 / rank``.
    """
    targets = (holdout,) if isinstance(holdout, str) else tuple(holdout)
    if len(set(targets)) != len(targets):
        raise IdenticalHoldoutError(f"left-out items must be distinct: {targets}")
    if k < 1:
        raise HybridRankError(f"k must be positive, got {k}")
    items = _items(ranking)
    ranks = sorted(r for r in (_rank_within(items, t, k) for t in targets) if r is not None)
    return sum(j / r for j, r in enumerate(ranks, start=1)) / len(targets)


def average_precision_two(ranking: Ranking, holdout: tuple[str, str], k: int) -> float:
    """``(1/r_first + 2/r_second) / 2`` for two left-out items within the top ``k``.

    The earlier-ranked hit always takes numerator 1, so the order in which the
    two items are given does not matter and the result never exceeds 1.
    """
    if len(holdout) != 2:
        raise HybridRankError(f"expected exactly two left-out items, got {len(holdout)}")
    return average_precision(ranking, holdout, k)


@dataclass(frozen=True)
class EvalReport:
    k: int
    per_user_ap: Mapping[str, float]
    map_at_k: float
    users_evaluated: int

    def write_csv(self, path: str | PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["user", "ap"])
            for user, ap in self.per_user_ap.items():
                writer.writerow([user, repr(ap)])


def map_at_k(
    ensembles: Mapping[str, Ranking],
    holdouts: Mapping[str, Holdout],
    k: int,
) -> EvalReport:
    """Mean average precision over every user in ``holdouts``.

    A user without a ranking scores 0 rather than being skipped.
    """
    if not holdouts:
        raise EmptyUserSetError("no users to evaluate")
    per_user: dict[str, float] = {}
    for user, holdout in holdouts.items():
        ranking = ensembles.get(user)
        per_user[user] = 0.0 if ranking is None else average_precision(ranking, holdout, k)
    score = float(np.mean(list(per_user.values())))
    return EvalReport(k, per_user, score, len(per_user))


@dataclass(frozen=True)
class RankCdf:
    """``counts[k - 1]`` users had their left-out item at rank ``<= k``."""

    k_max: int
    counts: np.ndarray
    total: int

    def at(self, k: int) -> int:
        return int(self.counts[k - 1])

    def write_csv(self, path: str | PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "count"])
            for k, count in enumerate(self.counts.tolist(), start=1):
                writer.writerow([k, count])


def rank_position_cdf(
    ensembles: Mapping[str, Ranking],
    holdouts: Mapping[str, str],
    k_max: int,
) -> RankCdf:
    if k_max < 1:
        raise HybridRankError(f"k_max must be positive, got {k_max}")
    hits = np.zeros(k_max + 1, dtype=np.int64)
    for user, item in holdouts.items():
        ranking = ensembles.get(user)
        if ranking is None:
            continue
        rank = _rank_within(_items(ranking), item, k_max)
        if rank is not None:
            hits[rank] += 1
    return RankCdf(k_max, np.cumsum(hits)[1:], len(holdouts))
