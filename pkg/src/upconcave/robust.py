"""Pointwise minimum of several monotone up-concave objectives."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EuclideanMap, HolderModulus, MirrorMap, NormKind, ObjectiveOracle, Region, SolveReport, dual_norm
from .mirror_prox import MirrorProxConfig, Theory, mirror_prox

TIE_TOL = 1e-9


@dataclass(frozen=True)
class RobustObjective:
    members: tuple[ObjectiveOracle, ...]
    lipschitz: float
    norm: NormKind = NormKind.L2
    lipschitz_estimated: bool = False

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("RobustObjective needs at least one member")
        if not self.lipschitz > 0:
            raise ValueError("shared Lipschitz constant must be positive")
        object.__setattr__(self, "members", members)

    @property
    def modulus(self) -> HolderModulus:
        return HolderModulus(((2.0 * self.lipschitz, 0.0),))

    def oracle(self) -> ObjectiveOracle:
        return ObjectiveOracle(
            value=lambda x: robust_value(self, x)[0],
            supergradient=lambda x: active_supergradient(self, x),
            norm=self.norm,
            modulus=self.modulus,
            lipschitz=self.lipschitz,
            name="robust_min",
        )


def robust_value(obj: RobustObjective, x) -> tuple[float, list[int]]:
    """(min_i F_i(x), 0-based indices within TIE_TOL of the minimum)."""
    x = np.asarray(x, dtype=float)
    vals = np.array([m.value(x) for m in obj.members])
    lo = float(vals.min())
    return lo, [int(i) for i in np.flatnonzero(vals <= lo + TIE_TOL)]


def active_supergradient(obj: RobustObjective, x) -> np.ndarray:
    _, active = robust_value(obj, x)
    return np.asarray(obj.members[active[0]].supergradient(np.asarray(x, dtype=float)), dtype=float)


def estimate_lipschitz(members, region: Region, norm: NormKind, n: int = 10_000, seed: int = 0, safety: float = 1.1) -> float:
    """safety * max over members and n sampled feasible points of the gradient dual norm."""
    pts = region.sample(np.random.default_rng(seed), n)
    best = 0.0
    for m in members:
        for x in pts:
            best = max(best, dual_norm(norm, m.supergradient(x)))
    return safety * best


def make_robust(members, region: Region | None = None, lipschitz: float | None = None, norm: NormKind = NormKind.L2) -> RobustObjective:
    if lipschitz is not None:
        return RobustObjective(tuple(members), float(lipschitz), norm)
    if region is None:
        raise ValueError("need a region to estimate the Lipschitz constant")
    return RobustObjective(tuple(members), estimate_lipschitz(members, region, norm), norm, lipschitz_estimated=True)


def bound_slack(obj: RobustObjective, D: float, T: int) -> float:
    """24 (D+2) L / sqrt(T)."""
    return 24.0 * (D + 2.0) * obj.lipschitz / np.sqrt(T)


def robust_mirror_prox(obj: RobustObjective, region: Region, T: int, mirror: MirrorMap | None = None, record_trajectory: bool = True) -> SolveReport:
    cfg = MirrorProxConfig(T, Theory(obj.modulus), mirror or EuclideanMap(), record_trajectory)
    rep = mirror_prox(obj.oracle(), region, cfg, name="robust_mirror_prox")
    rep.extras["lipschitz"] = obj.lipschitz
    rep.extras["lipschitz_estimated"] = obj.lipschitz_estimated
    return rep
