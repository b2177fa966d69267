import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridrank.core import Event, InteractionLog
from hybridrank.recommenders import (
    ColdUserError,
    RatingMatrix,
    most_popular,
    recommend_all,
    ubcf,
    ubcf_predictions,
)


def matrix(rows):
    return RatingMatrix.from_log(InteractionLog([Event(u, i, r, t) for t, (u, i, r) in enumerate(rows)]))


@pytest.fixture
def popular():
    # counts a:3, b:2, c:1
    return matrix([("1", "a", 5), ("2", "a", 5), ("3", "a", 5), ("1", "b", 5), ("2", "b", 5), ("3", "c", 5)])


def test_most_popular_skips_seen(popular):
    assert most_popular(popular, "2", 2).items == ("c",)
    assert most_popular(popular, "new", 2).items == ("a", "b")


def test_most_popular_seen_filter_example():
    m = matrix([("x", "a", 1), ("y", "a", 1), ("z", "a", 1), ("x", "b", 1), ("y", "b", 1), ("z", "c", 1), ("u", "b", 1)])
    assert most_popular(m, "u", 2).items == ("a", "c")


def test_most_popular_ties_by_item_id():
    m = matrix([("1", "10", 1), ("1", "9", 1), ("1", "b", 1), ("1", "a", 1)])
    assert most_popular(m, "new", 10).items == ("9", "10", "a", "b")


def test_most_popular_k_beyond_catalog(popular):
    assert most_popular(popular, "3", 100).items == ("b",)


def test_latest_duplicate_rating_wins():
    m = matrix([("1", "a", 1), ("1", "a", 5)])
    assert m.ratings.nnz == 1
    assert m.ratings[0, 0] == 5


def test_perfect_neighbor_extra_items_by_rating():
    m = matrix([("t", "a", 5), ("t", "b", 1), ("n", "a", 5), ("n", "b", 1), ("n", "c", 2), ("n", "d", 4), ("n", "e", 3)])
    assert ubcf(m, "t", 10, 5).items == ("d", "e", "c")


def test_hand_computed_predictions():
    m = matrix([
        ("t", "1", 5), ("t", "2", 3),
        ("u", "1", 4), ("u", "2", 2), ("u", "3", 5),
        ("v", "1", 1), ("v", "2", 5), ("v", "4", 2),
    ])
    # t centered (1, -1); u centered (1/3, -5/3, 4/3); v centered (-5/3, 7/3, -2/3)
    # sim(t,u) = 6/sqrt(84) = 0.654654, sim(t,v) = -12/sqrt(156) = -0.960769
    cols, predicted = ubcf_predictions(m, "t", 2)
    assert [m.items[c] for c in cols] == ["3", "4"]
    a, b = 6 / np.sqrt(84), 12 / np.sqrt(156)
    expected = [4 + a * (4 / 3) / (a + b), 4 + b * (2 / 3) / (a + b)]
    np.testing.assert_allclose(expected, [4.540336, 4.396498], atol=1e-6)
    np.testing.assert_allclose(predicted, expected, rtol=1e-12)
    assert ubcf(m, "t", 10, 2).items == ("3", "4")
    assert ubcf(m, "t", 10, 1).items == ("3",)


def test_cold_users():
    m = matrix([("t", "a", 3), ("t", "b", 3), ("n", "a", 4), ("n", "c", 2)])
    with pytest.raises(ColdUserError):
        ubcf(m, "nobody", 5)
    # all of t's ratings equal the mean, so t has zero norm
    with pytest.raises(ColdUserError):
        ubcf(m, "t", 5)


def test_recommend_all_falls_back(caplog):
    m = matrix([("t", "a", 3), ("t", "b", 3), ("n", "a", 4), ("n", "c", 2), ("o", "c", 5)])
    with caplog.at_level("INFO"):
        out = recommend_all(m, ["t", "n"], 5, "ubcf", 10)
    assert out["t"].items == most_popular(m, "t", 5).items
    assert out["t"].source == "ubcf10"
    assert "most-popular" in caplog.text


@st.composite
def rating_logs(draw):
    events = [
        Event(f"u{draw(st.integers(0, 7))}", f"i{draw(st.integers(0, 11))}", float(draw(st.integers(1, 5))), t)
        for t in range(draw(st.integers(1, 60)))
    ]
    return InteractionLog(events)


@settings(max_examples=60, deadline=None)
@given(rating_logs())
def test_fixture_properties(log):
    m = RatingMatrix.from_log(log)
    seen = {u: {e.item for e in evs} for u, evs in log.by_user().items()}
    base = [i for i in most_popular(m, "?", len(m.items)).items]
    for user in m.users:
        sims = m.similarities(user)
        assert np.all(np.abs(sims) <= 1 + 1e-12)
        for other in m.users:
            assert sims[m.user_index[other]] == pytest.approx(m.similarities(other)[m.user_index[user]], abs=1e-12)
        try:
            mp = most_popular(m, user, 100).items
        except ValueError:
            mp = ()
        assert not set(mp) & seen[user]
        assert list(mp) == [i for i in base if i not in seen[user]]
        try:
            assert not set(ubcf(m, user, 100, 3).items) & seen[user]
        except ColdUserError:
            pass


@pytest.mark.slow
def test_movielens_fixtures_in_range(ml_sources, ml_split):
    from hybridrank.metrics import map_at_k

    for name, lists in ml_sources.items():
        score = map_at_k(lists, ml_split.test_holdout, 1000).map_at_k
        assert 0.01 <= score <= 0.10, name
        assert all(len(r) <= 1000 for r in lists.values())
