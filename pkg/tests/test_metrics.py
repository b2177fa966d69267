import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridrank.core import Ensemble, Method, RankedList
from hybridrank.metrics import (
    EmptyUserSetError,
    IdenticalHoldoutError,
    average_precision,
    average_precision_two,
    map_at_k,
    rank_position_cdf,
)


def ranking_with(positions: dict[str, int], length: int = 1000) -> list[str]:
    """A ranking of ``length`` filler items with the given items placed at 1-based ranks."""
    items = [f"f{i}" for i in range(length)]
    for item, rank in positions.items():
        items[rank - 1] = item
    return items


def scan_ap(items, holdout, k):
    """Walk the top k once, accumulating precision at every hit."""
    targets = set(holdout)
    hits, total = 0, 0.0
    for position, item in enumerate(items[:k], start=1):
        if item in targets:
            hits += 1
            total += hits / position
    return total / len(targets)


def test_perfect_ranking():
    assert average_precision_two(ranking_with({"x": 1, "y": 2}), ("x", "y"), 1000) == 1.0


def test_nothing_found():
    assert average_precision_two(ranking_with({}), ("x", "y"), 1000) == 0.0


def test_ranks_four_and_ten():
    assert average_precision_two(ranking_with({"x": 4, "y": 10}), ("x", "y"), 1000) == pytest.approx(0.225, abs=1e-12)


def test_order_of_holdout_does_not_matter():
    items = ranking_with({"x": 10, "y": 4})
    assert average_precision_two(items, ("x", "y"), 1000) == average_precision_two(items, ("y", "x"), 1000)


def test_one_found():
    assert average_precision_two(ranking_with({"x": 5}), ("x", "y"), 1000) == pytest.approx(0.1, abs=1e-12)


def test_identical_holdout_rejected():
    with pytest.raises(IdenticalHoldoutError):
        average_precision_two(["a"], ("a", "a"), 10)


def test_single_holdout_is_reciprocal_rank():
    assert average_precision(ranking_with({"x": 32}), "x", 1000) == pytest.approx(1 / 32)
    assert average_precision(ranking_with({"x": 32}), "x", 31) == 0.0


def test_accepts_ensembles_and_ranked_lists():
    ens = Ensemble("u", [("a", 3), ("b", 2), ("c", 1)], Method.SEMI_GENETIC)
    ranked = RankedList("u", "s", ("a", "b", "c"))
    assert average_precision(ens, ("b", "c"), 3) == average_precision(ranked, ("b", "c"), 3)


def test_map_mean_of_two_users():
    report = map_at_k({"1": ["a"], "2": ["b"]}, {"1": "a", "2": "z"}, 10)
    assert report.map_at_k == 0.5
    assert report.users_evaluated == 2


def test_map_single_user_ranks_two_and_three():
    report = map_at_k({"u": ["f", "x", "y"]}, {"u": ("x", "y")}, 1000)
    assert report.map_at_k == pytest.approx(0.5833333333333334, abs=1e-12)


def test_missing_user_counts_zero():
    report = map_at_k({"1": ["a"]}, {"1": "a", "2": "a"}, 10)
    assert report.per_user_ap["2"] == 0.0
    assert report.map_at_k == 0.5


def test_empty_user_set():
    with pytest.raises(EmptyUserSetError):
        map_at_k({}, {}, 10)


def test_report_csv(tmp_path):
    report = map_at_k({"1": ["a", "b"]}, {"1": "b"}, 10)
    report.write_csv(tmp_path / "ap.csv")
    rows = list(csv.reader(open(tmp_path / "ap.csv")))
    assert rows == [["user", "ap"], ["1", "0.5"]]


def test_cdf_all_at_rank_one():
    cdf = rank_position_cdf({"1": ["a"], "2": ["b"]}, {"1": "a", "2": "b"}, 3)
    assert cdf.counts.tolist() == [2, 2, 2]


def test_cdf_none_found():
    cdf = rank_position_cdf({"1": ["a"]}, {"1": "z", "2": "z"}, 4)
    assert cdf.counts.tolist() == [0, 0, 0, 0]


def test_cdf_hand_counted():
    holdouts = {str(u): "h" for u in range(4)}
    rankings = {str(u): ranking_with({"h": r}, 10) for u, r in enumerate([1, 3, 3, 7])}
    cdf = rank_position_cdf(rankings, holdouts, 7)
    assert cdf.counts.tolist() == [1, 1, 3, 3, 3, 3, 4]
    assert cdf.at(3) == 3


def test_cdf_csv(tmp_path):
    cdf = rank_position_cdf({"1": ["a", "b"]}, {"1": "b"}, 2)
    cdf.write_csv(tmp_path / "cdf.csv")
    assert open(tmp_path / "cdf.csv").read().splitlines() == ["k,count", "1,0", "2,1"]


@st.composite
def ap_case(draw):
    length = draw(st.integers(2, 50))
    ranks = draw(st.lists(st.integers(1, length), min_size=2, max_size=2, unique=True))
    k = draw(st.integers(1, 60))
    return length, ranks, k


@settings(max_examples=300)
@given(ap_case())
def test_ap_matches_scan(case):
    length, ranks, k = case
    items = ranking_with({"x": ranks[0], "y": ranks[1]}, length)
    assert average_precision_two(items, ("x", "y"), k) == pytest.approx(scan_ap(items, ("x", "y"), k), abs=1e-12)
    assert 0.0 <= average_precision_two(items, ("x", "y"), k) <= 1.0


@settings(max_examples=300)
@given(ap_case(), st.integers(1, 49))
def test_better_rank_never_lowers_ap(case, better):
    length, (rx, ry), k = case
    if better >= rx or better == ry:
        return
    before = average_precision_two(ranking_with({"x": rx, "y": ry}, length), ("x", "y"), k)
    after = average_precision_two(ranking_with({"x": better, "y": ry}, length), ("x", "y"), k)
    assert after >= before


@given(ap_case(), st.integers(1, 30))
def test_items_beyond_k_are_ignored(case, extra):
    length, (rx, ry), k = case
    items = ranking_with({"x": rx, "y": ry}, length)
    junk = items[:k] + [f"j{i}" for i in range(extra)] + ["x", "y"]
    clean = items[:k]
    assert average_precision_two(junk, ("x", "y"), k) == average_precision_two(clean, ("x", "y"), k)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 20), st.integers(1, 50), st.integers(0, 2**32 - 1), st.integers(1, 60))
def test_map_and_cdf_against_scan(users, items, seed, k):
    rng = np.random.default_rng(seed)
    catalog = [f"i{j}" for j in range(items + 2)]
    rankings, pairs = {}, {}
    for u in range(users):
        perm = [catalog[j] for j in rng.permutation(len(catalog))]
        rankings[str(u)] = perm[: rng.integers(1, len(catalog) + 1)]
        a, b = rng.choice(len(catalog), 2, replace=False)
        pairs[str(u)] = (catalog[a], catalog[b])
    report = map_at_k(rankings, pairs, k)
    expected = np.mean([scan_ap(rankings[u], pairs[u], k) for u in pairs])
    assert report.map_at_k == pytest.approx(expected, abs=1e-12)
    assert report.map_at_k == pytest.approx(np.mean(list(report.per_user_ap.values())), abs=1e-12)

    firsts = {u: p[0] for u, p in pairs.items()}
    cdf = rank_position_cdf(rankings, firsts, k)
    assert np.all(np.diff(cdf.counts) >= 0)
    assert cdf.counts[-1] <= users
    for kk in (1, k):
        hits = sum(1 for u, h in firsts.items() if h in rankings[u][:kk])
        assert cdf.at(kk) == hits
