"""Learning to match graphs by searching the coset tree of S_n in Fourier space."""

from .estimators import FourierMatchingLearner, FourierQAPSolver
from .fourier import (
    FourierCoefficients,
    GraphChannel,
    assemble,
    brute_fourier_transform,
    correlation_transform,
    coset_restrict,
    global_bound,
    graph_fourier_transform,
    inverse_fourier_transform,
    nuclear_norm,
)
from .instances import MatchingInstance, load_instance, load_landmarks, save_instance, synthesize_pair
from .learning import TrainConfig, WeightVector, combine_transforms, cross_validate, evaluate, train
from .permutations import Permutation
from .solver import QAPProblem, branch_and_bound, brute_force_solve, greedy_descent

__version__ = "0.1.0"

__all__ = [
    "FourierCoefficients",
    "FourierMatchingLearner",
    "FourierQAPSolver",
    "GraphChannel",
    "MatchingInstance",
    "Permutation",
    "QAPProblem",
    "TrainConfig",
    "WeightVector",
    "assemble",
    "branch_and_bound",
    "brute_force_solve",
    "brute_fourier_transform",
    "combine_transforms",
    "correlation_transform",
    "coset_restrict",
    "cross_validate",
    "evaluate",
    "global_bound",
    "graph_fourier_transform",
    "greedy_descent",
    "inverse_fourier_transform",
    "load_instance",
    "load_landmarks",
    "nuclear_norm",
    "save_instance",
    "synthesize_pair",
    "train",
]
