"""Problem generators: multi-resolution summarization and DRO movie recommendation."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..core import CappedSimplex, HolderModulus, NormKind, ObjectiveOracle
from ..dro import CoverageCoupling, DroConstants, DroInstance
from ..robust import estimate_lipschitz
from .movielens import Ratings

# phi is 7x on [0, 1/2], 6x + 1/2 on [1/2, 3/4], 5x + 5/4 on [3/4, 1]
_SLOPES = (7.0, 6.0, 5.0)
_OFFSETS = (0.0, 0.5, 1.25)


def _check_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        raise ValueError("phi is defined on [0, 1] only")
    return np.clip(x, 0.0, 1.0)


def phi_eval(x):
    x = _check_unit(x)
    out = np.minimum.reduce([s * x + o for s, o in zip(_SLOPES, _OFFSETS)])
    return float(out) if out.ndim == 0 else out


def phi_superderivative(x):
    """Slope on open pieces; midpoint of the adjacent slopes at a breakpoint."""
    x = _check_unit(x)
    out = np.where(x < 0.5, 7.0, np.where(x < 0.75, 6.0, 5.0))
    out = np.where(x == 0.5, 6.5, np.where(x == 0.75, 5.5, out))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class SummarizationInstance:
    s: np.ndarray
    budget: float = 5.0

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("similarity matrix must be square")
        if np.any(s < 0) or np.any(s > 1):
            raise ValueError("similarities must lie in [0, 1]")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def k(self) -> int:
        return self.s.shape[0]

    @cached_property
    def region(self) -> CappedSimplex:
        return CappedSimplex(self.k, 1.0, self.budget, equality=True)


def gen_summarization(k: int, seed: int, budget: float = 5.0) -> SummarizationInstance:
    if k < 1:
        raise ValueError("k must be >= 1")
    return SummarizationInstance(np.random.default_rng(seed).random((k, k)), min(budget, float(k)))


def summarization_objective(inst: SummarizationInstance, lipschitz: float | None = None, estimate: bool = True) -> ObjectiveOracle:
    """F(x) = sum_ij phi(x_j) s_ij - sum_ij x_i x_j s_ij and its up-super-gradient.

    The declared modulus is the constant 2L.  L is sampled over the region
    unless given; with ``estimate=False`` and no L the modulus is left unset.
    """
    s = inst.s
    col = s.sum(axis=0)
    sym = s + s.T

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(col @ phi_eval(x) - x @ s @ x)

    def supergradient(x):
        x = np.asarray(x, dtype=float)
        return col * phi_superderivative(x) - sym @ x

    def value_batch(xs):
        return phi_eval(xs) @ col - np.einsum("ij,jk,ik->i", xs, s, xs)

    obj = ObjectiveOracle(value, supergradient, NormKind.L2, name="summarization", value_batch=value_batch)
    if lipschitz is None:
        if not estimate:
            return obj
        lipschitz = estimate_lipschitz([obj], inst.region, NormKind.L2, n=2000)
    obj.lipschitz = lipschitz
    obj.modulus = HolderModulus(((2.0 * lipschitz, 0.0),))
    return obj


@dataclass(frozen=True, eq=False)
class MovieRecInstance:
    ratings: np.ndarray  # N x m, imputed
    dro: DroInstance
    budget: int
    users: np.ndarray  # dense user indices of the sampled rows
    movies: np.ndarray  # dense movie indices of the columns

    @cached_property
    def region(self) -> CappedSimplex:
        return CappedSimplex(self.ratings.shape[1], 1.0, float(self.budget), equality=True)


# declared constants for ratings in [1, 5]
MOVIELENS_CONSTANTS = DroConstants(L1=5.0, lambda1=5.0, lambda2=10.0, L2=5.0)


def build_movierec_dro(
    ratings: Ratings,
    N: int,
    theta: float,
    eps: float,
    seed: int,
    m_cap: int = 50,
    budget: int = 5,
    impute: float = 1.0,
) -> MovieRecInstance:
    """Sample N users, keep the m_cap most-rated movies, impute missing ratings."""
    if N > ratings.n_users:
        raise ValueError(f"N={N} exceeds the {ratings.n_users} available users")
    if N < 1:
        raise ValueError("N must be >= 1")
    counts = np.bincount(ratings.movie, minlength=ratings.n_movies)
    m = min(m_cap, ratings.n_movies)
    movies = np.argsort(-counts, kind="stable")[:m]
    if budget > m:
        raise ValueError(f"budget {budget} exceeds the {m} movies kept")
    rng = np.random.default_rng(seed)
    users = np.sort(rng.choice(ratings.n_users, size=N, replace=False))
    col = np.full(ratings.n_movies, -1)
    col[movies] = np.arange(m)
    row = np.full(ratings.n_users, -1)
    row[users] = np.arange(N)
    R = np.full((N, m), float(impute))
    keep = (row[ratings.user] >= 0) & (col[ratings.movie] >= 0)
    R[row[ratings.user[keep]], col[ratings.movie[keep]]] = ratings.rating[keep]
    lo, hi = 1.0, 5.0
    if R.min() < lo or R.max() > hi:
        raise ValueError("ratings and imputed values must lie in [1, 5]")
    dro = DroInstance(R, np.full(N, 1.0 / N), theta, lo, hi, CoverageCoupling(), MOVIELENS_CONSTANTS, eps, NormKind.L1)
    return MovieRecInstance(R, dro, int(budget), users, movies)


def synthetic_ratings(n_users: int, n_movies: int, seed: int, density: float = 0.3) -> Ratings:
    """Integer ratings in 1..5 from a rank-2 taste model; each pair observed with prob ``density``."""
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(n_users, 2))
    v = rng.normal(size=(n_movies, 2))
    pop = rng.normal(size=n_movies)
    score = 3.0 + u @ v.T * 0.8 + pop[None, :] * 0.6 + rng.normal(scale=0.5, size=(n_users, n_movies))
    r = np.clip(np.rint(score), 1, 5)
    seen = rng.random((n_users, n_movies)) < density
    ui, mi = np.nonzero(seen)
    ts = 978300000 + rng.integers(0, 10**6, size=ui.size)
    return Ratings.from_arrays(ui + 1, mi + 1, r[ui, mi].astype(int), ts)
