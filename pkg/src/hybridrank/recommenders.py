"""Source recommenders used to produce input rankings from a training log.

Only two classic baselines live here: Most Popular and user-based
collaborative filtering. Any other recommender can feed the hybrids through
a rankings file.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .core import HybridRankError, InteractionLog, RankedList, item_sort_key

_log = logging.getLogger(__name__)

DEFAULT_NEIGHBORS = 30


class ColdUserError(HybridRankError):
    """No collaborative signal for this user; fall back to Most Popular."""


@dataclass(frozen=True, eq=False)
class RatingMatrix:
    """Sparse user x item ratings built from training events.

    Rows and columns are sorted by id, so column order equals ascending
    ItemId. Repeated (user, item) events keep the latest one. Events without
    a rating count as 1.0.
    """

    users: tuple[str, ...]
    items: tuple[str, ...]
    ratings: sparse.csr_matrix

    @classmethod
    def from_log(cls, log: InteractionLog) -> RatingMatrix:
        latest: dict[tuple[str, str], tuple[int, int, float]] = {}
        for order, e in enumerate(log):
            key = (e.user, e.item)
            stamp = (e.timestamp if e.timestamp is not None else -1, order)
            if key not in latest or stamp >= latest[key][:2]:
                rating = 1.0 if e.rating is None else float(e.rating)
                latest[key] = (*stamp, rating)
        users = tuple(sorted({u for u, _ in latest}, key=item_sort_key))
        items = tuple(sorted({i for _, i in latest}, key=item_sort_key))
        uidx = {u: n for n, u in enumerate(users)}
        iidx = {i: n for n, i in enumerate(items)}
        rows = np.fromiter((uidx[u] for u, _ in latest), dtype=np.int64, count=len(latest))
        cols = np.fromiter((iidx[i] for _, i in latest), dtype=np.int64, count=len(latest))
        vals = np.fromiter((v[2] for v in latest.values()), dtype=np.float64, count=len(latest))
        ratings = sparse.csr_matrix((vals, (rows, cols)), shape=(len(users), len(items)))
        ratings.sort_indices()
        return cls(users, items, ratings)

    @cached_property
    def user_index(self) -> dict[str, int]:
        return {u: n for n, u in enumerate(self.users)}

    @cached_property
    def popularity(self) -> np.ndarray:
        """Number of users with an event on each item."""
        return np.diff(self.ratings.tocsc().indptr)

    @cached_property
    def popularity_order(self) -> np.ndarray:
        # column index already encodes ascending ItemId, so a stable sort on -count suffices
        return np.argsort(-self.popularity, kind="stable")

    @cached_property
    def user_means(self) -> np.ndarray:
        counts = np.diff(self.ratings.indptr)
        sums = np.asarray(self.ratings.sum(axis=1)).ravel()
        return np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)

    @cached_property
    def centered(self) -> sparse.csr_matrix:
        """Ratings minus the user's mean, on rated cells only."""
        centered = self.ratings.copy()
        centered.data = centered.data - np.repeat(self.user_means, np.diff(centered.indptr))
        return centered

    @cached_property
    def norms(self) -> np.ndarray:
        return np.sqrt(np.asarray(self.centered.multiply(self.centered).sum(axis=1)).ravel())

    def seen_columns(self, row: int) -> np.ndarray:
        return self.ratings.indices[self.ratings.indptr[row] : self.ratings.indptr[row + 1]]

    def similarities(self, user: str) -> np.ndarray:
        """Cosine similarity of ``user``'s centered ratings with every user's.

        Zero-norm vectors (no ratings, or all ratings equal) get similarity 0.
        """
        row = self.user_index[user]
        dots = (self.centered @ self.centered[row].T).toarray().ravel()
        denom = self.norms * self.norms[row]
        return np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)


def most_popular(m: RatingMatrix, user: str, k: int) -> RankedList:
    """Top ``k`` items by interaction count, skipping what ``user`` already has."""
    order = m.popularity_order
    if user in m.user_index:
        seen = np.zeros(len(m.items), dtype=bool)
        seen[m.seen_columns(m.user_index[user])] = True
        order = order[~seen[order]]
    if len(order) == 0:
        raise HybridRankError(f"user {user!r} has seen every item")
    return RankedList(user, "most-popular", tuple(m.items[c] for c in order[:k].tolist()))


def ubcf_predictions(
    m: RatingMatrix, user: str, neighbors: int = DEFAULT_NEIGHBORS
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate item columns for ``user`` and their predicted ratings.

    The ``neighbors`` users most similar to ``user`` (cosine, nonzero only)
    vote on every item at least one of them rated. An item's predicted score
    is the user's mean plus the similarity-weighted mean of the neighbors'
    centered ratings, where neighbors who did not rate the item count 0.

    Raises:
        ColdUserError: ``user`` has no training events, no neighbor with
            nonzero similarity, or the neighbors rated nothing new.
    """
    if neighbors < 1:
        raise HybridRankError(f"neighbors must be positive, got {neighbors}")
    row = m.user_index.get(user)
    if row is None or m.ratings.indptr[row] == m.ratings.indptr[row + 1]:
        raise ColdUserError(f"user {user!r} has no training events")
    sims = m.similarities(user)
    sims[row] = 0.0
    informative = np.flatnonzero(sims)
    if len(informative) == 0:
        raise ColdUserError(f"user {user!r} has no neighbor with nonzero similarity")
    informative = informative[np.argsort(-sims[informative], kind="stable")]
    nearest = informative[:neighbors]
    weights = sims[nearest]
    block = m.centered[nearest]
    predicted = m.user_means[row] + (block.T @ weights) / np.abs(weights).sum()
    rated = np.zeros(len(m.items), dtype=bool)
    rated[m.ratings[nearest].indices] = True
    rated[m.seen_columns(row)] = False
    candidates = np.flatnonzero(rated)
    if len(candidates) == 0:
        raise ColdUserError(f"neighbors of user {user!r} rated nothing new")
    return candidates, predicted[candidates]


def ubcf(m: RatingMatrix, user: str, k: int, neighbors: int = DEFAULT_NEIGHBORS) -> RankedList:
    """Top ``k`` unseen items by UBCF prediction; equal predictions keep ascending ItemId."""
    candidates, predicted = ubcf_predictions(m, user, neighbors)
    ranked = candidates[np.argsort(-predicted, kind="stable")]
    return RankedList(user, f"ubcf{neighbors}", tuple(m.items[c] for c in ranked[:k].tolist()))


def recommend_all(
    m: RatingMatrix,
    users: list[str],
    k: int,
    method: str = "most-popular",
    neighbors: int = DEFAULT_NEIGHBORS,
) -> dict[str, RankedList]:
    """Rankings for every user; UBCF falls back to Most Popular on cold users."""
    out: dict[str, RankedList] = {}
    for user in users:
        if method == "ubcf":
            try:
                out[user] = ubcf(m, user, k, neighbors)
                continue
            except ColdUserError as exc:
                _log.info("%s; using most-popular", exc)
            out[user] = RankedList(user, f"ubcf{neighbors}", most_popular(m, user, k).items)
        elif method == "most-popular":
            out[user] = most_popular(m, user, k)
        else:
            raise HybridRankError(f"unknown recommender {method!r}")
    return out
