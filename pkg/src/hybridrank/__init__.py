"""Fuse unscored ranked recommendation lists.

Two hybridization methods are provided: a semi-genetic sampler that draws
items proportionally to their reciprocal rank and ranks them by draw
frequency, and the classic weighted vote. Around them sit the pieces needed
to evaluate them on MovieLens: loaders, a leave-two-out split, two fixture
recommenders, MAP@k, a grid search for the population size and a runtime
benchmark.
"""
from .core import (
    DuplicateItemError,
    Ensemble,
    Event,
    HybridRankError,
    InteractionLog,
    Method,
    RankedList,
    RecommendationSet,
    Split,
    TooFewSourcesError,
    UserMismatchError,
    validate_recommendation_set,
)
from .hybrid import (
    EmptyPoolError,
    FitnessPool,
    Population,
    ZeroPopulationError,
    assign_fitness,
    derive_seed,
    hybridize_all,
    rank_by_frequency,
    select_population,
    semi_genetic_hybrid,
    weighted_vote_hybrid,
)
from .metrics import (
    EvalReport,
    RankCdf,
    average_precision,
    average_precision_two,
    map_at_k,
    rank_position_cdf,
)

__version__ = "0.1.0"

__all__ = [
    "DuplicateItemError",
    "EmptyPoolError",
    "Ensemble",
    "EvalReport",
    "Event",
    "FitnessPool",
    "HybridRankError",
    "InteractionLog",
    "Method",
    "Population",
    "RankCdf",
    "RankedList",
    "RecommendationSet",
    "Split",
    "TooFewSourcesError",
    "UserMismatchError",
    "ZeroPopulationError",
    "assign_fitness",
    "average_precision",
    "average_precision_two",
    "derive_seed",
    "hybridize_all",
    "map_at_k",
    "rank_by_frequency",
    "rank_position_cdf",
    "select_population",
    "semi_genetic_hybrid",
    "validate_recommendation_set",
    "weighted_vote_hybrid",
]
