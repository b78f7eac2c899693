"""Minimal matchings of Poisson points under power-law costs."""
from .costs import CostSpec, MatchScore, arrangement, compare, edge_cost, pair_legal, score
from .errors import MatchlabError
from .finite_match import Matching, detect_tie, oracle_min, solve_min, solve_stable, tile_match
from .lazyline import LazyLine
from .line_constructions import (
    FinitaryCertificate,
    WindowMatching,
    alternating,
    certified_edges,
    coding_radius,
    compare_matchings,
    finitary_partner,
    kappa,
    level_matching,
    meshalkin,
    one_swap_variant,
    order_matching_k,
)
from .points import PointConfig, Seed, equal_count_pair, make_config, palm_augment, sample_poisson
from .walklevel import LevelAssignment, Walk, assign_levels, build_walk, find_Y, first_hit

__version__ = "0.1.0"
