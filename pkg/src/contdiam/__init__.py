"""Continuous diameter of polygonal networks and optimal shortcuts.

* :mod:`contdiam.geometry` -- paths and cycles parameterized by arc length
* :mod:`contdiam.paths` -- the best single shortcut for a path
* :mod:`contdiam.cycles` -- the best pair of shortcuts for a convex cycle
* :mod:`contdiam.oracle` -- brute-force diameters and grid searches
"""
from .cycles import (
    AlternatingPair,
    BalancedConfiguration,
    CandidateCycleLengths,
    ConsecutivePair,
    CyclePairSolution,
    advance_stage,
    balanced_configuration,
    candidate_cycle_lengths,
    check_corollary_3_14,
    consecutive_to_alternating,
    optimal_pair,
    relations,
    single_shortcut_no_gain_check,
    useful_alternating,
    useful_consecutive,
)
from .errors import (
    BudgetExceeded,
    ContDiamError,
    Degenerate,
    NotAShortcut,
    NotConvex,
    SolverError,
    WrongConfiguration,
)
from .geometry import ArcPosition, CycleNetwork, PathNetwork, Point, plain_diameter
from .oracle import approx_diameter, exact_diameter, grid_search_cycle_pair, grid_search_path
from .paths import (
    PathCandidateLengths,
    PathShortcutSolution,
    augmented_path_diameter,
    candidate_lengths,
    optimal_path_shortcut,
)

__version__ = "0.1.0"

__all__ = [
    "AlternatingPair",
    "ArcPosition",
    "BalancedConfiguration",
    "BudgetExceeded",
    "CandidateCycleLengths",
    "ConsecutivePair",
    "ContDiamError",
    "CycleNetwork",
    "CyclePairSolution",
    "Degenerate",
    "NotAShortcut",
    "NotConvex",
    "PathCandidateLengths",
    "PathNetwork",
    "PathShortcutSolution",
    "Point",
    "SolverError",
    "WrongConfiguration",
    "advance_stage",
    "approx_diameter",
    "augmented_path_diameter",
    "balanced_configuration",
    "candidate_cycle_lengths",
    "candidate_lengths",
    "check_corollary_3_14",
    "consecutive_to_alternating",
    "exact_diameter",
    "grid_search_cycle_pair",
    "grid_search_path",
    "optimal_pair",
    "optimal_path_shortcut",
    "plain_diameter",
    "relations",
    "single_shortcut_no_gain_check",
    "useful_alternating",
    "useful_consecutive",
]
