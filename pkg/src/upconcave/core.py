"""Norms, Hölder moduli, feasible regions, mirror maps and the oracle interface."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import kernels

FEAS_TOL = 1e-8


def as_vector(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Copy ``x`` into a finite 1-D float array, optionally checking its length."""
    v = np.array(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    return v


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class NormKind(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "NormKind":
        return {NormKind.L1: NormKind.LINF, NormKind.LINF: NormKind.L1, NormKind.L2: NormKind.L2}[self]

    @property
    def order(self) -> float:
        return {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: np.inf}[self]

    @classmethod
    def parse(cls, value) -> "NormKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def norm(kind: NormKind, x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float).reshape(-1), kind.order))


def dual_norm(kind: NormKind, g) -> float:
    """Norm of ``g`` in the dual of ``kind`` (l1 <-> linf, l2 self-dual)."""
    return norm(kind.dual, g)


@dataclass(frozen=True)
class HolderModulus:
    """h(z) = sum beta_i z**sigma_i with beta_i > 0 and sigma_i in [0, 1]."""

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(b), float(s)) for b, s in self.terms)
        if not terms:
            raise ValueError("HolderModulus needs at least one term")
        for b, s in terms:
            if not b > 0 or not math.isfinite(b):
                raise ValueError(f"beta must be positive and finite, got {b}")
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"sigma must lie in [0, 1], got {s}")
        object.__setattr__(self, "terms", terms)

    def sigma_min(self) -> float:
        return min(s for _, s in self.terms)

    def beta_sum(self) -> float:
        return sum(b for b, _ in self.terms)

    def __call__(self, z: float) -> float:
        return holder_eval(self, z)


def holder_eval(h: HolderModulus, z: float) -> float:
    if z < 0:
        raise ValueError(f"holder_eval needs z >= 0, got {z}")
    # 0**0 == 1 in Python, which is the convention we want
    return float(sum(b * float(z) ** s for b, s in h.terms))


class Region:
    """Convex, compact feasible set in the nonnegative orthant."""

    dim: int

    def lmo(self, g) -> np.ndarray:
        raise NotImplementedError

    def project(self, y) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x, tol: float = FEAS_TOL) -> bool:
        raise NotImplementedError

    def radius(self, kind: NormKind) -> float:
        raise NotImplementedError

    def diameter(self) -> float:
        """Euclidean diameter (an upper bound where noted)."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` random feasible points (not uniform), one per row."""
        raise NotImplementedError

    def _check(self, v, name="g") -> np.ndarray:
        return as_vector(v, self.dim, name)


@dataclass(frozen=True, eq=False)
class Box(Region):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = _frozen(self.lower).reshape(-1), _frozen(self.upper).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise ValueError("Box bounds must be nonempty and of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("Box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("Box needs lower <= upper")
        if np.any(lo < 0):
            raise ValueError("Box needs lower >= 0")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, d: int) -> "Box":
        return cls(np.zeros(d), np.ones(d))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def lmo(self, g):
        g = self._check(g)
        return np.where(g > 0, self.upper, self.lower)

    def project(self, y):
        return np.clip(self._check(y, "y"), self.lower, self.upper)

    def contains(self, x, tol=FEAS_TOL):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def radius(self, kind):
        return norm(kind, self.upper)

    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def sample(self, rng, n):
        return self.lower + rng.random((n, self.dim)) * (self.upper - self.lower)


@dataclass(frozen=True, eq=False)
class CappedSimplex(Region):
    """{0 <= x_i <= cap, sum x = budget} (or sum x <= budget when not ``equality``)."""

    d: int
    cap: float
    budget: float
    equality: bool = True

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("CappedSimplex needs d >= 1")
        if not (self.cap > 0 and self.budget > 0):
            raise ValueError("cap and budget must be positive")
        if self.budget > self.cap * self.d * (1 + 1e-12):
            raise ValueError(f"infeasible region: budget {self.budget} > cap*d = {self.cap * self.d}")

    @property
    def dim(self) -> int:
        return self.d

    def lmo(self, g):
        g = self._check(g)
        out = np.zeros(self.d)
        left = self.budget
        for j in np.argsort(-g, kind="stable"):
            if left <= 0 or (not self.equality and g[j] <= 0):
                break
            out[j] = min(self.cap, left)
            left -= out[j]
        return out

    def project(self, y):
        y = self._check(y, "y")
        if not self.equality:
            c = np.clip(y, 0.0, self.cap)
            if c.sum() <= self.budget:
                return c
        return kernels.capped_simplex_project(y, float(self.cap), float(self.budget), 100, 1e-13 * (1.0 + np.abs(y).max()))

    def contains(self, x, tol=FEAS_TOL):
        x = np.asarray(x, dtype=float)
        s = x.sum()
        ok_sum = abs(s - self.budget) <= tol * max(1.0, self.budget) if self.equality else s <= self.budget + tol
        return bool(ok_sum and np.all(x >= -tol) and np.all(x <= self.cap + tol))

    def _extreme_pattern(self) -> np.ndarray:
        k = int(math.floor(self.budget / self.cap + 1e-12))
        k = min(k, self.d)
        a = np.zeros(self.d)
        a[:k] = self.cap
        if k < self.d:
            a[k] = max(self.budget - k * self.cap, 0.0)
        return a

    def radius(self, kind):
        if kind is NormKind.L1:
            return float(self.budget)
        if kind is NormKind.LINF:
            return float(min(self.cap, self.budget))
        return float(np.linalg.norm(self._extreme_pattern()))

    def diameter(self):
        a = self._extreme_pattern()
        if self.equality:
            # rearrangement: the farthest pair of vertices pairs large entries with small ones
            return float(np.linalg.norm(a - a[::-1]))
        return float(min(math.sqrt(2.0) * np.linalg.norm(a), math.sqrt(self.d) * self.cap))

    def sample(self, rng, n):
        out = np.empty((n, self.d))
        for i in range(n):
            w = rng.dirichlet(np.ones(self.d)) * self.budget * (1.0 if self.equality else rng.random())
            out[i] = self.project(w)
        return out


@dataclass(frozen=True, eq=False)
class BudgetPolytope(Region):
    """{x >= 0, sum x <= budget}: down-closed, contains 0."""

    d: int
    budget: float

    def __post_init__(self):
        if self.d < 1 or not self.budget > 0:
            raise ValueError("BudgetPolytope needs d >= 1 and budget > 0")

    @property
    def dim(self) -> int:
        return self.d

    def lmo(self, g):
        g = self._check(g)
        out = np.zeros(self.d)
        j = int(np.argmax(g))
        if g[j] > 0:
            out[j] = self.budget
        return out

    def project(self, y):
        y = self._check(y, "y")
        c = np.maximum(y, 0.0)
        if c.sum() <= self.budget:
            return c
        b = float(self.budget)
        return kernels.capped_simplex_project(y, b, b, 100, 1e-13 * (1.0 + np.abs(y).max()))

    def contains(self, x, tol=FEAS_TOL):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= -tol) and x.sum() <= self.budget + tol)

    def radius(self, kind):
        return float(self.budget)

    def diameter(self):
        return float(self.budget * (math.sqrt(2.0) if self.d > 1 else 1.0))

    def sample(self, rng, n):
        w = rng.dirichlet(np.ones(self.d + 1), size=n)[:, : self.d]
        return w * self.budget


class MirrorMap:
    """1-strongly convex distance-generating function."""

    strong_convexity_norm: NormKind

    def phi(self, x) -> float:
        raise NotImplementedError

    def grad_phi(self, x) -> np.ndarray:
        raise NotImplementedError

    def prox(self, region: Region, x, xi) -> np.ndarray:
        raise NotImplementedError

    def argmin(self, region: Region) -> np.ndarray:
        raise NotImplementedError


class EuclideanMap(MirrorMap):
    strong_convexity_norm = NormKind.L2

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ x)

    def grad_phi(self, x):
        return np.array(x, dtype=float)

    def prox(self, region, x, xi):
        return region.project(np.asarray(x, dtype=float) - np.asarray(xi, dtype=float))

    def argmin(self, region):
        return region.project(np.zeros(region.dim))

    def __repr__(self):
        return "EuclideanMap()"


def bregman(mirror: MirrorMap, x, z) -> float:
    """V_x(z) = phi(z) - phi(x) - <grad phi(x), z - x>."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise ValueError("bregman arguments differ in shape")
    if isinstance(mirror, EuclideanMap):
        d = z - x
        return 0.5 * float(d @ d)
    return float(mirror.phi(z) - mirror.phi(x) - mirror.grad_phi(x) @ (z - x))


def prox(region: Region, mirror: MirrorMap, x, xi) -> np.ndarray:
    """argmin over the region of <xi, z> + V_x(z)."""
    x = as_vector(x, region.dim)
    if not region.contains(x, 1e-7):
        raise ValueError("prox center is not feasible")
    return mirror.prox(region, x, as_vector(xi, region.dim, "xi"))


def bregman_diameter(region: Region, mirror: MirrorMap) -> float:
    """Upper bound D on sup V_y(x) over the region."""
    if not isinstance(mirror, EuclideanMap):
        raise NotImplementedError("only the Euclidean map has a shipped diameter bound")
    return 0.5 * region.diameter() ** 2


@dataclass
class ObjectiveOracle:
    """Value and up-super-gradient access to F, with declared constants.

    ``delta`` is the worst-case dual-norm error of ``supergradient``.
    ``quadratic`` optionally exposes (A, b, c) for F = x'Ax/2 + b'x + c,
    which lets the grid oracle take an exact fast path.
    """

    value: Callable[[np.ndarray], float]
    supergradient: Callable[[np.ndarray], np.ndarray]
    norm: NormKind = NormKind.L2
    modulus: HolderModulus | None = None
    lipschitz: float | None = None
    delta: float = 0.0
    name: str = "objective"
    value_batch: Callable[[np.ndarray], np.ndarray] | None = None
    quadratic: tuple | None = None

    def values(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.value_batch is not None:
            return np.asarray(self.value_batch(xs), dtype=float)
        return np.array([self.value(x) for x in xs])


@dataclass
class SolveReport:
    solution: np.ndarray
    value: float
    values: list[tuple[int, float, float]]
    solver_name: str
    config: dict[str, Any]
    extras: dict[str, Any] = field(default_factory=dict)
