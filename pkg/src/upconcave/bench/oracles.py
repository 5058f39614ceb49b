"""Brute-force optimum oracles for acceptance checks."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .. import kernels
from ..core import Box, BudgetPolytope, CappedSimplex, ObjectiveOracle, Region
from ..dro import DroInstance, eval_H
from ..multilinear import SetFunction

MAX_GRID_DIM = 6
MAX_GRID_POINTS = 50_000_000
MAX_SETS = 1_000_000


def _axis(lo: float, hi: float, res: float) -> np.ndarray:
    n = int(math.ceil((hi - lo) / res - 1e-9)) + 1
    return np.linspace(lo, hi, max(n, 1))


def _region_axes(region: Region, res: float):
    """Grid axes and how to complete/filter a point for each region variant."""
    d = region.dim
    if isinstance(region, Box):
        return [_axis(l, u, res) for l, u in zip(region.lower, region.upper)], None
    if isinstance(region, CappedSimplex):
        ax = _axis(0.0, region.cap, res)
        return [ax] * (d - 1 if region.equality else d), region
    if isinstance(region, BudgetPolytope):
        return [_axis(0.0, region.budget, res)] * d, region
    raise TypeError(f"no grid for {type(region).__name__}")


def _complete(points: np.ndarray, region, tol=1e-9):
    if region is None:
        return points
    s = points.sum(axis=1)
    if isinstance(region, CappedSimplex) and region.equality:
        last = region.budget - s
        ok = (last >= -tol) & (last <= region.cap + tol)
        return np.column_stack([points[ok], np.clip(last[ok], 0.0, region.cap)])
    return points[s <= region.budget + tol]


def brute_force_opt_grid(objective: ObjectiveOracle, region: Region, resolution: float) -> tuple[float, np.ndarray]:
    """Best value over a regular grid of the region: a certified lower bound on the optimum.

    Equality-constrained simplices are gridded on d-1 free coordinates.
    Quadratic objectives on boxes use an exact per-line maximization over
    the last axis instead of visiting every point.
    """
    if region.dim > MAX_GRID_DIM:
        raise ValueError(f"grid oracle supports dim <= {MAX_GRID_DIM}, got {region.dim}")
    if not resolution >= 0.01 - 1e-12:
        raise ValueError("resolution must be >= 0.01")
    axes, filt = _region_axes(region, resolution)
    sizes = {a.size for a in axes}
    if objective.quadratic is not None and isinstance(region, Box) and len(sizes) == 1:
        A, b, c = objective.quadratic
        val, idx = kernels.grid_max_quadratic(
            np.ascontiguousarray(A, dtype=float), np.asarray(b, dtype=float), float(c),
            region.lower.copy(), region.upper.copy(), axes[0].size,
        )
        return float(val), np.array([axes[i][k] for i, k in enumerate(idx)])
    total = math.prod(a.size for a in axes)
    if total > MAX_GRID_POINTS:
        raise ValueError(f"grid has {total} points, above the cap {MAX_GRID_POINTS}")
    best, best_x = -math.inf, None
    chunk = 1 << 16
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.unravel_index(flat, tuple(a.size for a in axes))
        pts = np.column_stack([a[i] for a, i in zip(axes, idx)]) if axes else np.zeros((flat.size, 0))
        pts = _complete(pts, filt)
        if pts.shape[0] == 0:
            continue
        vals = objective.values(pts)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_x = float(vals[i]), pts[i].copy()
    return best, best_x


def brute_force_opt_sets(target, budget: int, delta: float = 1e-9) -> tuple[float, tuple[int, ...]]:
    """Best b-subset (0-based indices).  DRO targets score each set by H at its indicator vector."""
    if isinstance(target, DroInstance):
        m = target.d
    elif isinstance(target, SetFunction):
        m = target.m
    else:
        raise TypeError("target must be a SetFunction or a DroInstance")
    if not 0 <= budget <= m:
        raise ValueError(f"budget {budget} outside 0..{m}")
    count = math.comb(m, budget)
    if count > MAX_SETS:
        raise ValueError(f"{count} subsets exceed the enumeration cap {MAX_SETS}")
    combos = list(itertools.combinations(range(m), budget))
    masks = np.zeros((count, m), dtype=bool)
    for i, c in enumerate(combos):
        masks[i, list(c)] = True
    if isinstance(target, SetFunction):
        vals = target.eval_masks(masks)
    else:
        vals = np.array([eval_H(target, mk.astype(float), delta) for mk in masks])
    i = int(np.argmax(vals))
    return float(vals[i]), combos[i]
