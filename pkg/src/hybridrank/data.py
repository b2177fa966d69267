"""File formats and the leave-two-out split.

Formats (UTF-8, tab separated, no header):

* interaction logs: ``user  item  rating  timestamp`` (MovieLens ``u.data``)
* rankings: ``user  item_1  item_2 ...`` with items in rank order
* holdouts: ``user  item``
"""
from __future__ import annotations

import os
from os import PathLike
from pathlib import Path
from typing import Iterable, Mapping

from .core import (
    DuplicateItemError,
    Event,
    HybridRankError,
    InteractionLog,
    RankedList,
    Split,
    item_sort_key,
    normalize_id,
)

MOVIELENS_ENV = "HYBRIDRANK_ML100K"


class MalformedLineError(HybridRankError):
    def __init__(self, path: str | PathLike, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = str(path)
        self.line = line


class EmptyFileError(HybridRankError):
    pass


class DuplicateUserError(HybridRankError):
    pass


class DuplicateItemInLineError(DuplicateItemError):
    pass


def _lines(path: str | PathLike) -> Iterable[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line.strip():
                yield number, line


def load_movielens(path: str | PathLike) -> InteractionLog:
    """Read a MovieLens ``u.data`` style file, one event per non-blank line."""
    events = []
    for number, line in _lines(path):
        fields = line.split("\t")
        if len(fields) != 4:
            raise MalformedLineError(path, number, f"expected 4 tab-separated fields, got {len(fields)}")
        user, item, rating, timestamp = fields
        try:
            events.append(Event(normalize_id(user), normalize_id(item), float(rating), int(timestamp)))
        except ValueError as exc:
            raise MalformedLineError(path, number, str(exc)) from None
    if not events:
        raise EmptyFileError(f"{path}: no events")
    return InteractionLog(events)


def write_movielens(log: InteractionLog, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in log:
            rating = "" if e.rating is None else f"{e.rating:g}"
            timestamp = "" if e.timestamp is None else str(e.timestamp)
            fh.write(f"{e.user}\t{e.item}\t{rating}\t{timestamp}\n")


def load_rankings(path: str | PathLike, source: str | None = None) -> dict[str, RankedList]:
    """Read a rankings file into one :class:`RankedList` per user.

    ``source`` labels the lists; it defaults to the file name without suffix.
    """
    source = Path(path).stem if source is None else source
    rankings: dict[str, RankedList] = {}
    for number, line in _lines(path):
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) < 2 or not all(fields):
            raise MalformedLineError(path, number, "expected a user id followed by at least one item")
        user, items = fields[0], fields[1:]
        if user in rankings:
            raise DuplicateUserError(f"{path}:{number}: user {user!r} listed twice")
        if len(set(items)) != len(items):
            raise DuplicateItemInLineError(f"{path}:{number}: repeated item for user {user!r}")
        rankings[user] = RankedList(user, source, tuple(items))
    return rankings


def write_rankings(rankings: Mapping[str, Iterable[str]] | Iterable[RankedList], path: str | PathLike) -> None:
    """Write rankings, one line per user, users in ascending id order."""
    if isinstance(rankings, Mapping):
        rows = {user: tuple(getattr(r, "items", r)) for user, r in rankings.items()}
    else:
        rows = {r.user: r.items for r in rankings}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for user in sorted(rows, key=item_sort_key):
            fh.write("\t".join((user, *rows[user])) + "\n")


def load_holdout(path: str | PathLike) -> dict[str, str]:
    holdout: dict[str, str] = {}
    for number, line in _lines(path):
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 2 or not all(fields):
            raise MalformedLineError(path, number, "expected 'user<TAB>item'")
        if fields[0] in holdout:
            raise DuplicateUserError(f"{path}:{number}: user {fields[0]!r} listed twice")
        holdout[fields[0]] = fields[1]
    return holdout


def write_holdout(holdout: Mapping[str, str], path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for user in sorted(holdout, key=item_sort_key):
            fh.write(f"{user}\t{holdout[user]}\n")


def _chronological(events: list[Event]) -> list[Event]:
    # sorted() is stable, so equal timestamps keep input order
    if all(e.timestamp is not None for e in events):
        return sorted(events, key=lambda e: e.timestamp)
    return list(events)


def leave_two_out_split(log: InteractionLog) -> Split:
    """Hold out each user's last event for testing and the one before for tuning.

    Users with fewer than three events go entirely to train. Events without
    timestamps are taken in input order.
    """
    train: list[Event] = []
    tune: dict[str, str] = {}
    test: dict[str, str] = {}
    for user, events in log.by_user().items():
        if len(events) < 3:
            train.extend(events)
            continue
        ordered = _chronological(events)
        train.extend(ordered[:-2])
        tune[user] = ordered[-2].item
        test[user] = ordered[-1].item
    return Split(InteractionLog(train), tune, test)


def write_split(split: Split, out_dir: str | PathLike) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"train": out / "train.tsv", "tune": out / "tune.tsv", "test": out / "test.tsv"}
    write_movielens(split.train, paths["train"])
    write_holdout(split.tune_holdout, paths["tune"])
    write_holdout(split.test_holdout, paths["test"])
    return paths


def find_movielens(path: str | PathLike | None = None) -> Path | None:
    """Locate a MovieLens 100K ``u.data``.

    Looks at ``path``, then ``$HYBRIDRANK_ML100K``, then ``data/ml-100k/u.data``
    relative to the working directory and to the source checkout.
    """
    candidates = []
    if path is not None:
        candidates.append(Path(path))
    if os.environ.get(MOVIELENS_ENV):
        candidates.append(Path(os.environ[MOVIELENS_ENV]))
    candidates.append(Path.cwd() / "data" / "ml-100k" / "u.data")
    candidates.append(Path(__file__).resolve().parents[2] / "data" / "ml-100k" / "u.data")
    for candidate in candidates:
        if candidate.is_dir():
            candidate = candidate / "u.data"
        if candidate.is_file():
            return candidate
    return None
