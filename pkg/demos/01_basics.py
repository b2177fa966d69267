#!/usr/bin/env python3
# Fusing two toy rankings with both methods.

from hybridrank import (
    RecommendationSet,
    assign_fitness,
    rank_by_frequency,
    select_population,
    semi_genetic_hybrid,
    weighted_vote_hybrid,
)

# two sources for one user, best source first
rs = RecommendationSet.from_items("alice", [
    ["matrix", "alien", "heat", "fargo", "brazil"],
    ["fargo", "matrix", "clue", "heat"],
], sources=["ubcf", "popular"])

# every (list, item) pair becomes a chromosome with fitness 1/rank
pool = assign_fitness(rs)
for item, fitness, source in pool.entries:
    print(f"{source}  {item:<8} {fitness:.3f}")
print("total fitness", round(pool.total_fitness, 4))

# one selection pass, then count
pop = select_population(pool, n=2000, seed=7)
print(pop.multiset(pool).most_common())
print(rank_by_frequency(pop, pool).entries)

# same thing in one call
print(semi_genetic_hybrid(rs, n=2000, seed=7).items)

# the baseline: one vote per list, ties by source order
print(weighted_vote_hybrid(rs).entries)

# small n leaves low-fitness items undrawn; pad puts them back with score 0
short = semi_genetic_hybrid(rs, n=5, seed=1)
padded = semi_genetic_hybrid(rs, n=5, seed=1, pad=True)
print(len(short), "items drawn,", len(padded), "after padding")
