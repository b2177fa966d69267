"""Glue for the MovieLens Top-N experiment: sources, ordering, per-user sets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import RankedList, RecommendationSet, Split, item_sort_key
from .metrics import map_at_k
from .recommenders import RatingMatrix, recommend_all


@dataclass(frozen=True)
class SourceSpec:
    method: str
    neighbors: int = 30

    @property
    def name(self) -> str:
        return "most-popular" if self.method == "most-popular" else f"ubcf{self.neighbors}"


# Smaller neighborhoods give progressively weaker UBCF variants, which play
# the part of additional, worse source recommenders in Top-3 and Top-4.
DEFAULT_ROSTER = (
    SourceSpec("ubcf", 30),
    SourceSpec("most-popular"),
    SourceSpec("ubcf", 3),
    SourceSpec("ubcf", 1),
)


def build_sources(
    split: Split,
    roster: Sequence[SourceSpec] = DEFAULT_ROSTER,
    k: int = 1000,
) -> dict[str, dict[str, RankedList]]:
    """Rankings from each roster entry for every holdout user, trained on ``split.train``."""
    matrix = RatingMatrix.from_log(split.train)
    users = sorted(set(split.tune_holdout) | set(split.test_holdout), key=item_sort_key)
    return {spec.name: recommend_all(matrix, users, k, spec.method, spec.neighbors) for spec in roster}


def order_sources(
    sources: Mapping[str, Mapping[str, RankedList]],
    holdout: Mapping[str, str],
    k: int = 1000,
) -> list[tuple[str, float]]:
    """Source names with their MAP@k, best first (ties by name)."""
    scored = [(name, map_at_k(lists, holdout, k).map_at_k) for name, lists in sources.items()]
    return sorted(scored, key=lambda s: (-s[1], s[0]))


def top_n_sets(
    sources: Mapping[str, Mapping[str, RankedList]],
    names: Sequence[str],
) -> dict[str, RecommendationSet]:
    """Per-user recommendation sets from the named sources, in the given order.

    Users missing from any of the named sources are left out.
    """
    common = set.intersection(*(set(sources[name]) for name in names))
    return {
        user: RecommendationSet(tuple(sources[name][user] for name in names))
        for user in sorted(common, key=item_sort_key)
    }
