"""Exact solver and verifier for private-experimentation disclosure games."""

from alpgame.model import Belief, PersuasionProblem, best_action, indirect_utility, make_problem
from alpgame.signals import (
    IntervalSet,
    PosteriorDistribution,
    Realization,
    Region,
    Signal,
    induced_distribution,
    is_bayes_plausible,
    join,
    likelihood,
    posterior,
    refines,
    signal_from_distribution,
)
from alpgame.equilibrium import (
    equilibrium_from_distribution,
    is_alp,
    signal_deviation_check,
    verify_equilibrium,
    worst_punishment,
)
from alpgame.solver import enumerate_candidates, grid_oracle, solve, value_curve

__version__ = "0.1.0"

__all__ = [
    "Belief",
    "IntervalSet",
    "PersuasionProblem",
    "PosteriorDistribution",
    "Realization",
    "Region",
    "Signal",
    "best_action",
    "enumerate_candidates",
    "equilibrium_from_distribution",
    "grid_oracle",
    "indirect_utility",
    "induced_distribution",
    "is_alp",
    "is_bayes_plausible",
    "join",
    "likelihood",
    "make_problem",
    "posterior",
    "refines",
    "signal_deviation_check",
    "signal_from_distribution",
    "solve",
    "value_curve",
    "verify_equilibrium",
    "worst_punishment",
]
