"""Mirror-prox (extragradient) ascent for monotone up-concave objectives."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import EuclideanMap, HolderModulus, MirrorMap, ObjectiveOracle, Region, SolveReport, bregman_diameter


@dataclass(frozen=True)
class Theory:
    """gamma_t = 1 / (2 t^((1 - sigma)/2) sum beta)."""

    modulus: HolderModulus


@dataclass(frozen=True)
class Fixed:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("fixed step must be positive")

    @classmethod
    def sqrt_horizon(cls, T: int) -> "Fixed":
        """The constant 1/(2 sqrt T)."""
        return cls(1.0 / (2.0 * math.sqrt(T)))


StepSchedule = Theory | Fixed


def step_size(schedule: StepSchedule, t: int) -> float:
    if t < 1:
        raise ValueError("t must be >= 1")
    if isinstance(schedule, Fixed):
        return schedule.gamma
    h = schedule.modulus
    return 1.0 / (2.0 * t ** ((1.0 - h.sigma_min()) / 2.0) * h.beta_sum())


def candidate_window(T: int) -> tuple[int, int]:
    """First and last half-step index whose iterate is eligible for return."""
    if T < 3:
        raise ValueError(f"T must be >= 3, got {T}")
    return (T - 2) // 3 + 1, T - 1


def bound_slack(modulus: HolderModulus, D: float, T: int, delta: float = 0.0) -> float:
    """delta sqrt(2D) + 12 (D+2) sum beta / T^((1+sigma)/2) + T^((1+sigma)/2) delta^2 / sum beta."""
    bs = modulus.beta_sum()
    p = T ** ((1.0 + modulus.sigma_min()) / 2.0)
    return delta * math.sqrt(2.0 * D) + 12.0 * (D + 2.0) * bs / p + p * delta**2 / bs


@dataclass(frozen=True)
class MirrorProxConfig:
    T: int
    schedule: StepSchedule
    mirror_map: MirrorMap = field(default_factory=EuclideanMap)
    record_trajectory: bool = True

    def __post_init__(self):
        candidate_window(self.T)


def schedule_label(schedule: StepSchedule) -> dict:
    if isinstance(schedule, Fixed):
        return {"kind": "fixed", "gamma": schedule.gamma}
    return {"kind": "theory", "terms": [list(t) for t in schedule.modulus.terms]}


def _run(
    region: Region,
    cfg: MirrorProxConfig,
    grad: Callable[[np.ndarray, str, int], np.ndarray],
    evaluate: Callable[[np.ndarray], float],
    name: str,
) -> SolveReport:
    T = cfg.T
    mm = cfg.mirror_map
    first, last = candidate_window(T)
    x = mm.argmin(region)
    best_val, best_x, best_t = -math.inf, None, None
    rows = []
    t0 = time.perf_counter()
    for t in range(1, T):
        gamma = step_size(cfg.schedule, t)
        g = grad(x, "full", t)
        half = mm.prox(region, x, -gamma * g)
        g_half = grad(half, "half", t)
        x = mm.prox(region, x, -gamma * g_half)
        in_window = first <= t <= last
        if in_window or cfg.record_trajectory:
            val = float(evaluate(half))
            if in_window and val > best_val:
                best_val, best_x, best_t = val, half, t
            if cfg.record_trajectory:
                rows.append((t, val, time.perf_counter() - t0))
    if cfg.record_trajectory:
        rows.append((T, best_val, time.perf_counter() - t0))
    return SolveReport(
        solution=best_x,
        value=best_val,
        values=rows,
        solver_name=name,
        config={
            "T": T,
            "schedule": schedule_label(cfg.schedule),
            "mirror_map": type(mm).__name__,
            "window": [first, last],
            "tie_break": "lowest index",
        },
        extras={"argmax_t": best_t, "D": bregman_diameter(region, mm)},
    )


def mirror_prox(objective: ObjectiveOracle, region: Region, cfg: MirrorProxConfig, *, name: str = "mirror_prox") -> SolveReport:
    """Extragradient ascent; returns the best half-step iterate in the candidate window.

    Trajectory rows hold F at each half-step iterate for t = 1..T-1 plus a
    final row T carrying the returned value.
    """

    def grad(x, _kind, t):
        g = np.asarray(objective.supergradient(x), dtype=float)
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"oracle returned a non-finite gradient at iteration {t}")
        return g

    return _run(region, cfg, grad, objective.value, name)
