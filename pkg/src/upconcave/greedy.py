"""Continuous greedy (Frank-Wolfe style averaging of LMO vertices)."""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from .core import ObjectiveOracle, Region, SolveReport


class GradientPoint(enum.Enum):
    SCALED_PREV = "scaled_prev"
    SCALED_CURRENT = "scaled_current"


@dataclass(frozen=True)
class GreedyConfig:
    """Iteration count and where the oracle gradient is taken.

    SCALED_PREV queries ((t-1)/T) x_{t-1}; SCALED_CURRENT queries
    (t/T) x_{t-1}, the latest iterate available before v_t is chosen.
    """

    T: int
    gradient_point: GradientPoint = GradientPoint.SCALED_PREV
    record_trajectory: bool = True

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T}")
        object.__setattr__(self, "gradient_point", GradientPoint(self.gradient_point))


def bound_slack(objective: ObjectiveOracle, region: Region, T: int) -> float:
    """2 delta R + sum beta_i R^(1+sigma_i) / T^sigma_i."""
    if objective.modulus is None:
        raise ValueError("objective has no declared modulus")
    R = region.radius(objective.norm)
    s = sum(b * R ** (1 + sg) / T**sg for b, sg in objective.modulus.terms)
    return 2 * objective.delta * R + s


def continuous_greedy(objective: ObjectiveOracle, region: Region, cfg: GreedyConfig, *, name: str = "continuous_greedy") -> SolveReport:
    d = region.dim
    T = cfg.T
    total = np.zeros(d)
    x = np.zeros(d)
    rows = []
    t0 = time.perf_counter()
    for t in range(1, T + 1):
        scale = (t - 1) / T if cfg.gradient_point is GradientPoint.SCALED_PREV else t / T
        g = np.asarray(objective.supergradient(scale * x), dtype=float)
        if g.shape != (d,):
            raise ValueError(f"oracle gradient has shape {g.shape}, region has dimension {d}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"oracle returned a non-finite gradient at iteration {t}")
        total += region.lmo(g)
        x = total / t
        if cfg.record_trajectory:
            rows.append((t, float(objective.value(x)), time.perf_counter() - t0))
    value = rows[-1][1] if rows else float(objective.value(x))
    return SolveReport(
        solution=x,
        value=value,
        values=rows,
        solver_name=name,
        config={"T": T, "gradient_point": cfg.gradient_point.value},
    )
