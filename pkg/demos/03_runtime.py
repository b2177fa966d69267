#!/usr/bin/env python3
# How long does fusing every user take, and how does it grow with n?

import random

import numpy as np

from hybridrank import RecommendationSet
from hybridrank.bench import BenchConfig, bench_methods, normalize_to_baseline, summarize

rng = random.Random(0)
users = 1000
sets = {
    str(u): RecommendationSet.from_items(str(u), [rng.sample(range(5000), 1000) for _ in range(2)])
    for u in range(users)
}

configs = [BenchConfig("weighted")] + [BenchConfig("semi-genetic", n) for n in (1000, 5000, 20000)]
rows = bench_methods(sets, configs, repeats=10)

raw = summarize(rows)
rel = summarize(normalize_to_baseline(rows, "weighted"))
for label in raw:
    print(f"{label:<22} {raw[label]['median'] / 1e6:8.1f} ms   x{rel[label]['median']:.2f}")

# per-user cost, roughly
per_user = np.array([raw[c.label]["median"] for c in configs]) / users / 1e3
print("microseconds per user:", np.round(per_user, 1))
