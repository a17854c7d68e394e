"""Exact toolkit for G-Hilbert schemes of diagonal abelian G in SL_n and their toric fans."""

__version__ = "0.1.0"

from .group_lattice import GroupSpec, a_r_n, character_of, n_membership, parse_group, socle_generators
from .staircase_hilb import Staircase, enumerate_fixed_points, minimal_generators
from .toric_fan import Decomposition, build_decomposition, check_report, star_classify, wall_relation
from .resolutions import blow_down, build_a14, build_xi_ar3, flop, hilb_pipeline

__all__ = [
    "Decomposition",
    "GroupSpec",
    "Staircase",
    "a_r_n",
    "blow_down",
    "build_a14",
    "build_decomposition",
    "build_xi_ar3",
    "character_of",
    "check_report",
    "enumerate_fixed_points",
    "flop",
    "hilb_pipeline",
    "minimal_generators",
    "n_membership",
    "parse_group",
    "socle_generators",
    "star_classify",
    "wall_relation",
]
