"""Domain types shared across the package.

All types are immutable after construction. Item and user identifiers are
normalized to stripped strings so integer movie ids and free-text names go
through the same code paths.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from operator import itemgetter
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence


class HybridRankError(ValueError):
    """Base class for all errors raised by this package."""


class DuplicateItemError(HybridRankError):
    pass


class TooFewSourcesError(HybridRankError):
    pass


class UserMismatchError(HybridRankError):
    pass


class EmptyIdError(HybridRankError):
    pass


def normalize_id(value: object) -> str:
    """Return the canonical string form of a user or item id."""
    text = str(value).strip()
    if not text:
        raise EmptyIdError(f"identifier {value!r} is empty after stripping whitespace")
    return text


def item_sort_key(item: str) -> tuple[int, int | str]:
    """Ordering used wherever "ascending ItemId" breaks ties.

    Purely numeric ids sort numerically and before any non-numeric id, which
    keeps MovieLens ids in their natural order.
    """
    if item.isdigit():
        return (0, int(item))
    return (1, item)


@dataclass(frozen=True)
class RankedList:
    """One source recommender's ordered items for one user.

    Position ``p`` (1-based) is the rank of ``items[p - 1]``. Duplicates are
    rejected when the list enters a :class:`RecommendationSet`, not here, so
    raw lists can still be inspected by :func:`validate_recommendation_set`.
    """

    user: str
    source: str
    items: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "user", normalize_id(self.user))
        object.__setattr__(self, "source", str(self.source))
        items = tuple(normalize_id(i) for i in self.items)
        if not items:
            raise HybridRankError(f"ranked list for user {self.user!r} is empty")
        object.__setattr__(self, "items", items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[str]:
        return iter(self.items)

    def rank_of(self, item: str) -> int | None:
        try:
            return self.items.index(item) + 1
        except ValueError:
            return None


def validate_recommendation_set(lists: Sequence[RankedList]) -> None:
    """Check that ``lists`` can be hybridized; raise on the first violation.

    Checks run in a fixed order: number of sources, shared user, then
    duplicates within each list.
    """
    if len(lists) < 2:
        raise TooFewSourcesError(f"hybridization needs at least 2 source lists, got {len(lists)}")
    user = lists[0].user
    for lst in lists[1:]:
        if lst.user != user:
            raise UserMismatchError(f"lists mix users {user!r} and {lst.user!r}")
    for index, lst in enumerate(lists):
        if len(set(lst.items)) != len(lst.items):
            seen: set[str] = set()
            dup = next(i for i in lst.items if i in seen or seen.add(i))
            raise DuplicateItemError(
                f"item {dup!r} repeated in source {index} ({lst.source!r}) for user {user!r}"
            )


@dataclass(frozen=True)
class RecommendationSet:
    """Source lists for one user, best source first."""

    lists: tuple[RankedList, ...]

    def __post_init__(self) -> None:
        lists = tuple(self.lists)
        validate_recommendation_set(lists)
        object.__setattr__(self, "lists", lists)

    @property
    def user(self) -> str:
        return self.lists[0].user

    @classmethod
    def from_items(
        cls,
        user: object,
        lists: Iterable[Iterable[object]],
        sources: Sequence[str] | None = None,
    ) -> RecommendationSet:
        lists = [tuple(lst) for lst in lists]
        if sources is None:
            sources = [f"source{i}" for i in range(len(lists))]
        return cls(tuple(RankedList(str(user), s, lst) for s, lst in zip(sources, lists)))

    def __len__(self) -> int:
        return len(self.lists)


class Method(str, enum.Enum):
    SEMI_GENETIC = "semi-genetic"
    WEIGHTED_VOTE = "weighted"


@dataclass(frozen=True)
class Ensemble:
    """Fused ranking produced by a hybridization method.

    ``entries`` holds ``(item, score)`` pairs in final order. Scores are draw
    counts for the semi-genetic method and vote counts for weighted voting.
    """

    user: str
    entries: tuple[tuple[str, float], ...]
    method: Method
    seed: int | None = None
    n: int | None = None
    _items: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "_items", tuple(map(itemgetter(0), self.entries)))

    @property
    def items(self) -> tuple[str, ...]:
        return self._items

    @property
    def scores(self) -> tuple[float, ...]:
        return tuple(score for _, score in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def top(self, k: int) -> tuple[str, ...]:
        return self._items[:k]

    def check(self, rs: RecommendationSet | None = None) -> None:
        """Raise ``AssertionError`` if an ensemble invariant is broken."""
        scores = self.scores
        assert all(s >= 0 for s in scores), "negative score"
        assert all(a >= b for a, b in zip(scores, scores[1:])), "scores not non-increasing"
        assert len(set(self._items)) == len(self._items), "duplicate item"
        if rs is not None:
            known = {i for lst in rs.lists for i in lst.items}
            missing = [i for i in self._items if i not in known]
            assert not missing, f"items not in any source list: {missing[:5]}"


class Event(NamedTuple):
    user: str
    item: str
    rating: float | None = None
    timestamp: int | None = None


@dataclass(frozen=True)
class InteractionLog:
    """User-item events in input order."""

    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def users(self) -> list[str]:
        return sorted({e.user for e in self.events}, key=item_sort_key)

    def items(self) -> list[str]:
        return sorted({e.item for e in self.events}, key=item_sort_key)

    def by_user(self) -> dict[str, list[Event]]:
        grouped: dict[str, list[Event]] = {}
        for event in self.events:
            grouped.setdefault(event.user, []).append(event)
        return grouped


@dataclass(frozen=True)
class Split:
    train: InteractionLog
    tune_holdout: Mapping[str, str]
    test_holdout: Mapping[str, str]
