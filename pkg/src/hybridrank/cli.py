"""Command-line pipeline: split, recommend, hybridize, evaluate, tune, bench, repro.

Exit codes: 0 success, 2 usage or input error, 3 runtime failure.
Defaults for any option may come from ``--config FILE`` (``key=value`` lines)
and the default seed from ``$HYBRIDRANK_SEED``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bench, data, experiment, tune
from .core import HybridRankError, Method, RecommendationSet, TooFewSourcesError, item_sort_key
from .hybrid import hybridize_all
from .metrics import map_at_k, rank_position_cdf
from .recommenders import DEFAULT_NEIGHBORS, RatingMatrix, recommend_all

_log = logging.getLogger("hybridrank")

SEED_ENV = "HYBRIDRANK_SEED"
EXIT_INPUT = 2
EXIT_RUNTIME = 3


class RuntimeFailure(Exception):
    """Raised for failures that are not the caller's input (exit code 3)."""


def parse_grid(text: str) -> list[int]:
    """``start:stop:step`` (inclusive stop) or a comma separated list."""
    try:
        if ":" in text:
            start, stop, step = (int(p) for p in text.split(":"))
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"grid {text!r} must contain positive sizes")
    return values


def read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise HybridRankError(f"{path}:{number}: expected key=value")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise HybridRankError(f"${SEED_ENV} must be an integer, got {raw!r}") from None


def _load_sets(paths: Sequence[str]) -> dict[str, RecommendationSet]:
    if len(paths) < 2:
        raise TooFewSourcesError(f"hybridization needs at least 2 ranking files, got {len(paths)}")
    sources = {f"{i}:{p}": data.load_rankings(p) for i, p in enumerate(paths)}
    sets = experiment.top_n_sets(sources, list(sources))
    skipped = set().union(*(set(s) for s in sources.values())) - set(sets)
    if skipped:
        _log.warning("skipping %d users missing from some ranking files", len(skipped))
    return sets


def _holdouts(args) -> dict:
    first = data.load_holdout(args.holdout)
    if not getattr(args, "holdout2", None):
        return first
    second = data.load_holdout(args.holdout2)
    return {u: (first[u], second[u]) for u in first if u in second}


def cmd_split(args) -> int:
    log = data.load_movielens(args.input)
    split = data.leave_two_out_split(log)
    paths = data.write_split(split, args.out_dir)
    print(f"{len(log)} events, {len(log.users())} users, {len(log.items())} items")
    print(f"train events: {len(split.train)}; tune users: {len(split.tune_holdout)}; "
          f"test users: {len(split.test_holdout)}")
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    return 0


def cmd_recommend(args) -> int:
    train = data.load_movielens(args.train)
    matrix = RatingMatrix.from_log(train)
    users = sorted(data.load_holdout(args.users), key=item_sort_key) if args.users else list(matrix.users)
    rankings = recommend_all(matrix, users, args.k, args.method, args.neighbors)
    data.write_rankings(rankings, args.out)
    print(f"wrote {len(rankings)} {args.method} rankings (k={args.k}) to {args.out}")
    return 0


def cmd_hybridize(args) -> int:
    method = Method(args.method)
    if method is Method.WEIGHTED_VOTE and args.n is not None:
        _log.warning("--n is ignored by the weighted method")
    if method is Method.SEMI_GENETIC and args.n is None:
        raise HybridRankError("--n is required for the semi-genetic method")
    sets = _load_sets(args.rankings)
    ensembles = hybridize_all(sets, method, args.n, args.seed, pad=args.pad)
    data.write_rankings({u: e.items for u, e in ensembles.items()}, args.out)
    if args.scores_out:
        with open(args.scores_out, "w", encoding="utf-8", newline="\n") as fh:
            for user in sorted(ensembles, key=item_sort_key):
                for rank, (item, score) in enumerate(ensembles[user].entries, start=1):
                    fh.write(f"{user}\t{rank}\t{item}\t{score}\n")
    print(f"hybridized {len(ensembles)} users with {method.value} -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    rankings = data.load_rankings(args.rankings)
    holdouts = _holdouts(args)
    report = map_at_k(rankings, holdouts, args.k)
    print(f"MAP@{args.k} = {report.map_at_k:.6f} over {report.users_evaluated} users")
    if args.out:
        report.write_csv(args.out)
    if args.cdf_out:
        single = {u: (h if isinstance(h, str) else h[-1]) for u, h in holdouts.items()}
        rank_position_cdf(rankings, single, args.k_max or args.k).write_csv(args.cdf_out)
    return 0


def _baseline_runtimes(sets, repeats: int, seed: int) -> list[int]:
    rows = bench.bench_methods(sets, [bench.BenchConfig(Method.WEIGHTED_VOTE)], repeats, seed=seed)
    return [r.runtime_ns for r in rows]


def cmd_tune(args) -> int:
    sets = _load_sets(args.rankings)
    holdouts = _holdouts(args)
    results = tune.grid_search(sets, holdouts, args.grid, args.repeats, args.k, args.seed, jobs=args.jobs)
    if args.out:
        tune.write_grid_csv(results, args.out)
    if args.summary_out:
        tune.write_grid_summary_csv(results, args.summary_out)
    print("n\tmedian_map\tci_low\tci_high\tmedian_runtime_ms")
    for r in results:
        print(f"{r.n}\t{r.median_map:.5f}\t{r.ci95_low:.5f}\t{r.ci95_high:.5f}\t{r.median_runtime_ns / 1e6:.2f}")
    baseline = _baseline_runtimes(sets, args.baseline_repeats or args.repeats, args.seed)
    print(f"fastest weighted run: {min(baseline) / 1e6:.2f} ms")
    try:
        chosen = tune.select_n(results, baseline)
    except tune.NoFeasibleNError as exc:
        print(f"no feasible n: {exc}")
        print(f"best n ignoring runtime: {tune.best_n(results)}")
        return EXIT_RUNTIME
    print(f"chosen n: {chosen}")
    return 0


def cmd_bench(args) -> int:
    sets = _load_sets(args.rankings)
    configs = [bench.BenchConfig(Method.WEIGHTED_VOTE)]
    configs += [bench.BenchConfig(Method.SEMI_GENETIC, n) for n in args.n or []]
    rows = bench.bench_methods(
        sets, configs, args.repeats, seed=args.seed, warmup=not args.no_warmup, parallel=args.jobs
    )
    normalized = bench.normalize_to_baseline(rows, configs[0].label)
    if args.out:
        bench.write_bench_csv(rows, args.out)
    if args.normalized_out:
        bench.write_normalized_csv(normalized, args.normalized_out)
    print("method\tmedian_ms\trelative_median")
    raw = bench.summarize(rows)
    rel = bench.summarize(normalized)
    for label in raw:
        print(f"{label}\t{raw[label]['median'] / 1e6:.2f}\t{rel[label]['median']:.3f}")
    return 0


def cmd_repro(args) -> int:
    work = Path(args.work_dir)
    work.mkdir(parents=True, exist_ok=True)
    split = data.leave_two_out_split(data.load_movielens(args.input))
    data.write_split(split, work / "split")
    print(f"split: {len(split.tune_holdout)} tune users, {len(split.test_holdout)} test users")
    sources = experiment.build_sources(split, k=args.k)
    for name, lists in sources.items():
        data.write_rankings(lists, work / f"{name}.tsv")
    ranking = experiment.order_sources(sources, split.tune_holdout, args.k)
    test_scores = {name: map_at_k(sources[name], split.test_holdout, args.k).map_at_k for name, _ in ranking}
    print("source\ttune_map\ttest_map")
    for name, score in ranking:
        print(f"{name}\t{score:.5f}\t{test_scores[name]:.5f}")
    names = [name for name, _ in ranking]
    summary = ["top\tn\tn_rule\tsemi_median_map\tweighted_map\tbest_single_map\tsemi_median_ms\tweighted_median_ms"]
    for top in args.top:
        sets = experiment.top_n_sets(sources, names[:top])
        tune_sets = {u: s for u, s in sets.items() if u in split.tune_holdout}
        results = tune.grid_search(tune_sets, split.tune_holdout, args.grid, args.repeats, args.k, args.seed)
        tune.write_grid_summary_csv(results, work / f"top{top}_grid.csv")
        baseline = _baseline_runtimes(tune_sets, args.repeats, args.seed)
        try:
            n, rule = tune.select_n(results, baseline), "runtime"
        except tune.NoFeasibleNError as exc:
            n, rule = tune.best_n(results), "best-map"
            _log.warning("Top-%d: %s; falling back to best median MAP", top, exc)
        scores = [
            map_at_k(hybridize_all(sets, Method.SEMI_GENETIC, n, tune.repeat_seed(args.seed + 1, n, r)),
                     split.test_holdout, args.k).map_at_k
            for r in range(args.repeats)
        ]
        weighted = map_at_k(hybridize_all(sets, Method.WEIGHTED_VOTE), split.test_holdout, args.k).map_at_k
        rows = bench.bench_methods(
            sets, [bench.BenchConfig(Method.WEIGHTED_VOTE), bench.BenchConfig(Method.SEMI_GENETIC, n)],
            args.repeats, seed=args.seed,
        )
        bench.write_normalized_csv(bench.normalize_to_baseline(rows, "weighted"), work / f"top{top}_bench.csv")
        medians = bench.summarize(rows)
        best_single = max(test_scores[name] for name in names[:top])
        summary.append(
            f"{top}\t{n}\t{rule}\t{np.median(scores):.5f}\t{weighted:.5f}\t{best_single:.5f}\t"
            f"{medians[f'semi-genetic(n={n})']['median'] / 1e6:.2f}\t{medians['weighted']['median'] / 1e6:.2f}"
        )
    (work / "summary.tsv").write_text("\n".join(summary) + "\n", encoding="utf-8")
    print("\n".join(summary))
    return 0


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridrank", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file with option defaults")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="leave-two-out split of a MovieLens file")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("recommend", help="rankings from a fixture recommender")
    p.add_argument("--train", required=True)
    p.add_argument("--method", choices=["most-popular", "ubcf"], required=True)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--neighbors", type=int, default=DEFAULT_NEIGHBORS)
    p.add_argument("--users", help="holdout file restricting the users to recommend for")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("hybridize", help="fuse ranking files, best source first")
    p.add_argument("--rankings", nargs="+", required=True)
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--pad", action="store_true", help="append undrawn items with score 0")
    p.add_argument("--out", required=True)
    p.add_argument("--scores-out", help="also write user, rank, item, score rows")
    p.set_defaults(func=cmd_hybridize)

    p = sub.add_parser("evaluate", help="MAP@k of a rankings file")
    p.add_argument("--rankings", required=True)
    p.add_argument("--holdout", required=True)
    p.add_argument("--holdout2")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--out", help="per-user AP CSV")
    p.add_argument("--cdf-out", help="rank-position CDF CSV")
    p.add_argument("--k-max", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="grid search for the population size n")
    p.add_argument("--rankings", nargs="+", required=True)
    p.add_argument("--holdout", required=True)
    p.add_argument("--holdout2")
    p.add_argument("--grid", type=parse_grid, default=list(tune.DEFAULT_GRID))
    p.add_argument("--repeats", type=int, default=tune.DEFAULT_REPEATS)
    p.add_argument("--baseline-repeats", type=int)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="per-repeat CSV")
    p.add_argument("--summary-out", help="per-n summary CSV")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("bench", help="runtime of weighted vs semi-genetic hybridization")
    p.add_argument("--rankings", nargs="+", required=True)
    p.add_argument("--n", type=int, action="append", help="semi-genetic population size (repeatable)")
    p.add_argument("--repeats", type=int, default=tune.DEFAULT_REPEATS)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--no-warmup", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="concurrent timing workers (skews timings)")
    p.add_argument("--out", help="raw runtime CSV")
    p.add_argument("--normalized-out", help="runtime relative to the weighted median")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("repro", help="split, recommend, tune, evaluate and bench in one go")
    p.add_argument("--input", required=True)
    p.add_argument("--work-dir", required=True)
    p.add_argument("--top", type=lambda s: [int(x) for x in s.split(",")], default=[2, 3, 4])
    p.add_argument("--grid", type=parse_grid, default=list(tune.DEFAULT_GRID))
    p.add_argument("--repeats", type=int, default=tune.DEFAULT_REPEATS)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--seed", type=int, default=default_seed)
    p.set_defaults(func=cmd_repro)
    return parser


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sub in subparsers.choices.values():
        for action in sub._actions:
            if action.dest not in values:
                continue
            value = values[action.dest]
            if isinstance(action, argparse._AppendAction):
                value = [action.type(v) for v in value.split(",")]
            elif isinstance(action, argparse._StoreTrueAction):
                value = value.lower() in ("1", "true", "yes", "on")
            sub.set_defaults(**{action.dest: value})


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(_default_seed())
        pre, _ = parser.parse_known_args(argv) if "--config" in argv else (None, None)
        if pre is not None and pre.config:
            _apply_config(parser, read_config(pre.config))
    except (HybridRankError, OSError) as exc:
        print(f"hybridrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except tune.NoFeasibleNError as exc:
        print(f"hybridrank: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (HybridRankError, OSError, KeyError) as exc:
        print(f"hybridrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RuntimeFailure, MemoryError) as exc:
        print(f"hybridrank: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
