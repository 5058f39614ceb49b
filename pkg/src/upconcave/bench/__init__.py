"""Experiment harness: problem generators, MovieLens ingestion, brute-force oracles."""
from .movielens import MovieLensFormatError, Ratings, load_ratings, parse_movielens, write_movielens
from .oracles import brute_force_opt_grid, brute_force_opt_sets
from .problems import (
    MovieRecInstance,
    SummarizationInstance,
    build_movierec_dro,
    gen_summarization,
    phi_eval,
    phi_superderivative,
    summarization_objective,
    synthetic_ratings,
)

__all__ = [
    "MovieLensFormatError",
    "Ratings",
    "load_ratings",
    "parse_movielens",
    "write_movielens",
    "brute_force_opt_grid",
    "brute_force_opt_sets",
    "MovieRecInstance",
    "SummarizationInstance",
    "build_movierec_dro",
    "gen_summarization",
    "phi_eval",
    "phi_superderivative",
    "summarization_objective",
    "synthetic_ratings",
]
