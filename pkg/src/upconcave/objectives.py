"""Stock test objectives and a gradient-noise wrapper."""
from __future__ import annotations

import dataclasses

import numpy as np

from .core import HolderModulus, NormKind, ObjectiveOracle, dual_norm


def linear(c, norm: NormKind = NormKind.L2) -> ObjectiveOracle:
    """F(x) = <c, x>.  Modulus is a tiny constant term since the gradient never moves."""
    c = np.array(c, dtype=float)
    return ObjectiveOracle(
        value=lambda x: float(c @ x),
        supergradient=lambda x: c.copy(),
        norm=norm,
        modulus=HolderModulus(((1e-12, 1.0),)),
        lipschitz=dual_norm(norm, c),
        name="linear",
        value_batch=lambda xs: xs @ c,
        quadratic=(np.zeros((c.size, c.size)), c, 0.0),
    )


def quadratic(A, b, c: float = 0.0, norm: NormKind = NormKind.L2) -> ObjectiveOracle:
    """F(x) = x'Ax/2 + b'x + c with symmetric A.

    DR-submodular exactly when A <= 0 entrywise.  The declared modulus is the
    operator norm of A from ``norm`` to its dual.
    """
    A = np.array(A, dtype=float)
    A = 0.5 * (A + A.T)
    b = np.array(b, dtype=float)
    beta = _operator_norm(A, norm)
    return ObjectiveOracle(
        value=lambda x: float(0.5 * x @ A @ x + b @ x + c),
        supergradient=lambda x: A @ x + b,
        norm=norm,
        modulus=HolderModulus(((max(beta, 1e-12), 1.0),)),
        name="quadratic",
        value_batch=lambda xs: 0.5 * np.einsum("ij,jk,ik->i", xs, A, xs) + xs @ b + c,
        quadratic=(A, b, float(c)),
    )


def _operator_norm(A, kind: NormKind) -> float:
    if kind is NormKind.L2:
        return float(np.linalg.norm(A, 2))
    if kind is NormKind.L1:
        # l1 -> linf: largest entry
        return float(np.abs(A).max())
    # linf -> l1: bounded by the entrywise l1 norm
    return float(np.abs(A).sum())


def random_monotone_quadratic(d: int, rng: np.random.Generator, margin: float = 0.1) -> ObjectiveOracle:
    """DR-submodular quadratic, monotone on the unit box, with F(0) = 0.

    A <= 0 entrywise; b >= -A 1 + margin keeps the gradient positive on [0, 1]^d.
    """
    M = -rng.random((d, d))
    A = 0.5 * (M + M.T)
    b = -A.sum(axis=1) + margin + rng.random(d)
    return quadratic(A, b)


def with_gradient_noise(obj: ObjectiveOracle, delta: float, seed: int) -> ObjectiveOracle:
    """Wrap ``obj`` so each supergradient gets noise drawn uniformly from the dual-norm ball of radius delta."""
    rng = np.random.default_rng(seed)
    kind = obj.norm.dual

    def noisy(x):
        g = np.asarray(obj.supergradient(x), dtype=float)
        return g + delta * _uniform_ball(rng, kind, g.size)

    return dataclasses.replace(obj, supergradient=noisy, delta=obj.delta + delta, name=f"{obj.name}+noise")


def _uniform_ball(rng, kind: NormKind, d: int) -> np.ndarray:
    if kind is NormKind.LINF:
        return rng.uniform(-1.0, 1.0, d)
    if kind is NormKind.L2:
        u = rng.normal(size=d)
        return u / np.linalg.norm(u) * rng.random() ** (1.0 / d)
    w = rng.dirichlet(np.ones(d + 1))[:d]
    return w * rng.choice([-1.0, 1.0], size=d)
