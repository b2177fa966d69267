#!/usr/bin/env python3
# MovieLens 100K end to end: split, two fixture recommenders, Top-2 fusion, MAP@1000.
#
# Needs data/ml-100k/u.data (python tools/fetch_movielens.py).

import numpy as np

from hybridrank import Method, hybridize_all, map_at_k, rank_position_cdf
from hybridrank.data import find_movielens, leave_two_out_split, load_movielens
from hybridrank.experiment import build_sources, order_sources, top_n_sets

path = find_movielens()
if path is None:
    raise SystemExit("u.data not found, run tools/fetch_movielens.py first")

log = load_movielens(path)
split = leave_two_out_split(log)
print(len(log), "ratings;", len(split.test_holdout), "test users")

K = 1000
sources = build_sources(split, k=K)

# rank sources on the tuning holdout so the test holdout stays untouched
ranking = order_sources(sources, split.tune_holdout, K)
for name, score in ranking:
    test = map_at_k(sources[name], split.test_holdout, K).map_at_k
    print(f"{name:<13} tune {score:.4f}  test {test:.4f}")

top2 = top_n_sets(sources, [name for name, _ in ranking[:2]])

weighted = hybridize_all(top2, Method.WEIGHTED_VOTE)
print("weighted      test", round(map_at_k(weighted, split.test_holdout, K).map_at_k, 4))

scores = []
for seed in range(20):
    ens = hybridize_all(top2, Method.SEMI_GENETIC, n=5000, seed=seed)
    scores.append(map_at_k(ens, split.test_holdout, K).map_at_k)
print("semi-genetic  test median", round(float(np.median(scores)), 4),
      "range", round(min(scores), 4), "-", round(max(scores), 4))

# how many test items land in the top k
cdf_w = rank_position_cdf(weighted, split.test_holdout, K)
cdf_s = rank_position_cdf(ens, split.test_holdout, K)
for k in (10, 100, 1000):
    print(f"hits@{k:<5} weighted {cdf_w.at(k):>4}  semi-genetic {cdf_s.at(k):>4}")
