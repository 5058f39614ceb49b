"""Monotone up-concave maximization: continuous greedy, mirror-prox, robust and Wasserstein-DRO solvers."""
from .core import (
    Box,
    BudgetPolytope,
    CappedSimplex,
    EuclideanMap,
    HolderModulus,
    NormKind,
    ObjectiveOracle,
    SolveReport,
    bregman,
    bregman_diameter,
    dual_norm,
    holder_eval,
    norm,
    prox,
)
from .greedy import GradientPoint, GreedyConfig, continuous_greedy
from .kernels import BACKEND
from .mirror_prox import Fixed, MirrorProxConfig, Theory, candidate_window, mirror_prox, step_size
from .robust import RobustObjective, active_supergradient, robust_mirror_prox, robust_value

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Box",
    "BudgetPolytope",
    "CappedSimplex",
    "EuclideanMap",
    "Fixed",
    "GradientPoint",
    "GreedyConfig",
    "HolderModulus",
    "MirrorProxConfig",
    "NormKind",
    "ObjectiveOracle",
    "RobustObjective",
    "SolveReport",
    "Theory",
    "active_supergradient",
    "bregman",
    "bregman_diameter",
    "candidate_window",
    "continuous_greedy",
    "dual_norm",
    "holder_eval",
    "mirror_prox",
    "norm",
    "prox",
    "robust_mirror_prox",
    "robust_value",
    "step_size",
]
