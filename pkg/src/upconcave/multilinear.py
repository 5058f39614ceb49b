"""Set functions and their multilinear extensions.

Subsets are boolean masks over the ground set ``[m]``; integer masks use bit
``j`` for element ``j``.  Sampled estimators draw ``S ~ x`` in fixed blocks of
``BLOCK`` samples, block ``k`` seeded with ``default_rng([seed, k])``.  Any
split of the blocks across workers therefore reproduces the same numbers.
"""
from __future__ import annotations

import functools
from typing import Iterable

import numpy as np

from . import kernels

ENUM_CAP = 20
BLOCK = 4096


class SetFunction:
    """Base class: subclasses implement ``eval_masks``."""

    m: int

    def eval_masks(self, masks: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, S: Iterable[int]) -> float:
        mask = np.zeros((1, self.m), dtype=bool)
        mask[0, list(S)] = True
        return float(self.eval_masks(mask)[0])

    def singletons(self) -> np.ndarray:
        return self.eval_masks(np.eye(self.m, dtype=bool))

    def marginals(self, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """f(S) and f(S + j) - f(S - j) for every row S and element j."""
        b = masks.shape[0]
        vals = self.eval_masks(masks)
        marg = np.empty((b, self.m))
        for j in range(self.m):
            up = masks.copy()
            up[:, j] = True
            down = masks.copy()
            down[:, j] = False
            marg[:, j] = self.eval_masks(up) - self.eval_masks(down)
        return vals, marg

    @functools.cached_property
    def table(self) -> np.ndarray:
        if self.m > ENUM_CAP:
            raise ValueError(f"ground set of size {self.m} exceeds the enumeration cap {ENUM_CAP}")
        ints = np.arange(1 << self.m)
        masks = ((ints[:, None] >> np.arange(self.m)) & 1).astype(bool)
        out = np.empty(ints.size)
        for s in range(0, ints.size, 1 << 16):
            out[s : s + (1 << 16)] = self.eval_masks(masks[s : s + (1 << 16)])
        return out


class ModularFunction(SetFunction):
    def __init__(self, w):
        self.w = np.asarray(w, dtype=float)
        self.m = self.w.size

    def eval_masks(self, masks):
        return masks @ self.w


class CoverageFunction(SetFunction):
    """f(S) = max_{j in S} r_j, with f(empty) = 0."""

    def __init__(self, r):
        self.r = np.asarray(r, dtype=float)
        if np.any(self.r < 0):
            raise ValueError("coverage weights must be nonnegative")
        self.m = self.r.size

    def eval_masks(self, masks):
        return np.where(masks, self.r, 0.0).max(axis=1, initial=0.0)

    def marginals(self, masks):
        return kernels.coverage_marginals(np.ascontiguousarray(masks), self.r)


class SetCoverFunction(SetFunction):
    """Weighted coverage: total weight of universe items hit by the chosen sets."""

    def __init__(self, incidence, item_weights=None):
        self.incidence = np.asarray(incidence, dtype=float)  # (m sets, n items), 0/1
        n = self.incidence.shape[1]
        self.item_weights = np.ones(n) if item_weights is None else np.asarray(item_weights, dtype=float)
        self.m = self.incidence.shape[0]

    def eval_masks(self, masks):
        hit = (masks.astype(float) @ self.incidence) > 0
        return hit @ self.item_weights


class FacilityLocation(SetFunction):
    """f(S) = sum_i max_{j in S} M_ij for a nonnegative client-by-facility matrix M."""

    def __init__(self, M):
        self.M = np.asarray(M, dtype=float)
        if np.any(self.M < 0):
            raise ValueError("facility benefits must be nonnegative")
        self.m = self.M.shape[1]

    def eval_masks(self, masks):
        return np.where(masks[:, None, :], self.M[None, :, :], 0.0).max(axis=2, initial=0.0).sum(axis=1)


def _check_x(f: SetFunction, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != f.m:
        raise ValueError(f"x has dimension {x.size}, expected {f.m}")
    if np.any(x < 0) or np.any(x > 1) or not np.all(np.isfinite(x)):
        raise ValueError("x must lie in the unit box")
    return x


def exact_value(f: SetFunction, x) -> float:
    x = _check_x(f, x)
    return float(kernels.multilinear_value(f.table, x))


def exact_gradient(f: SetFunction, x) -> np.ndarray:
    x = _check_x(f, x)
    return kernels.multilinear_grad(f.table, x)


def exact_partial(f: SetFunction, x, j: int) -> float:
    """F(x | x_j = 1) - F(x | x_j = 0)."""
    x = _check_x(f, x)
    if not 0 <= j < f.m:
        raise IndexError(j)
    hi, lo = x.copy(), x.copy()
    hi[j], lo[j] = 1.0, 0.0
    return exact_value(f, hi) - exact_value(f, lo)


def _blocks(x: np.ndarray, B: int, seed: int):
    for k, start in enumerate(range(0, B, BLOCK)):
        n = min(BLOCK, B - start)
        u = np.random.default_rng([seed, k]).random((n, x.size))
        yield u < x


def _moments(f: SetFunction, x, B: int, seed: int, want_grad: bool):
    if B < 1:
        raise ValueError("batch size must be positive")
    x = _check_x(f, x)
    s1 = np.zeros(f.m if want_grad else 1)
    s2 = np.zeros_like(s1)
    for masks in _blocks(x, B, seed):
        if want_grad:
            _, v = f.marginals(masks)
        else:
            v = f.eval_masks(masks)[:, None]
        s1 += v.sum(axis=0)
        s2 += (v * v).sum(axis=0)
    mean = s1 / B
    var = np.maximum(s2 / B - mean**2, 0.0) * (B / max(B - 1, 1))
    return mean, np.sqrt(var / B)


def sampled_value(f: SetFunction, x, B: int, seed: int, return_se: bool = False):
    """Monte-Carlo mean of f(S), S ~ x; optionally with its standard error."""
    mean, se = _moments(f, x, B, seed, False)
    return (float(mean[0]), float(se[0])) if return_se else float(mean[0])


def sampled_gradient(f: SetFunction, x, B: int, seed: int, return_se: bool = False):
    """Mean of f(S + j) - f(S - j) over S ~ x, for each j."""
    mean, se = _moments(f, x, B, seed, True)
    return (mean, se) if return_se else mean


def lipschitz_constant(f: SetFunction) -> float:
    """max_j f({j}): bounds every partial, hence an l1-Lipschitz constant of the extension."""
    return float(f.singletons().max(initial=0.0))
