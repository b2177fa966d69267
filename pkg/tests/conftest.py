import random
from pathlib import Path

import pytest

from hybridrank import data, experiment
from hybridrank.core import RecommendationSet

_criteria: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    number = getattr(report, "criterion_number", None)
    if number is None:
        return
    if report.when == "call" or report.outcome != "passed":
        details = [v for k, v in report.user_properties if k == "detail"]
        _criteria[number] = (report.outcome, "; ".join(details) or report.nodeid.split("::")[-1])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion_number = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        outcome, detail = _criteria[number]
        label = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"criterion {number}: {label}  {detail}")


def random_sets(rng: random.Random, users: int, lists: int, length: int, catalog: int) -> dict:
    """Random per-user recommendation sets with overlapping items."""
    out = {}
    for u in range(users):
        ranked = [rng.sample(range(catalog), length) for _ in range(lists)]
        out[str(u)] = RecommendationSet.from_items(str(u), ranked)
    return out


@pytest.fixture
def synth():
    return random_sets


@pytest.fixture(scope="session")
def movielens_path() -> Path:
    path = data.find_movielens()
    if path is None:
        pytest.skip("MovieLens 100K u.data not found; run tools/fetch_movielens.py")
    return path


@pytest.fixture(scope="session")
def ml_log(movielens_path):
    return data.load_movielens(movielens_path)


@pytest.fixture(scope="session")
def ml_split(ml_log):
    return data.leave_two_out_split(ml_log)


@pytest.fixture(scope="session")
def ml_sources(ml_split):
    return experiment.build_sources(ml_split, k=1000)


@pytest.fixture(scope="session")
def ml_order(ml_sources, ml_split):
    # source priority comes from the tuning holdout, never from test
    return [name for name, _ in experiment.order_sources(ml_sources, ml_split.tune_holdout, 1000)]
