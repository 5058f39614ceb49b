"""Wasserstein distributionally robust maximization.

The worst case over a 2-Wasserstein ball around the empirical distribution
{(xi_i, p_i)} is the finite problem over scenario blocks

    Z = {(zeta_1..zeta_N) : sum_i p_i ||xi_i - zeta_i||^2 <= theta^2, zeta_i in box},

regularized as R(x, zeta) = sum_i p_i (f(x, zeta_i) + eps/(2 theta^2) ||xi_i - zeta_i||^2)
with value function H(x) = inf_Z R(x, .).  H is monotone, up-concave and
Hölder-smooth with exponents {1, 1/2}, and lies within eps/2 above the
unregularized worst case.

Two inner solvers are used:

* smooth couplings (finite ``zeta_smoothness``): projected gradient descent
  in the p-weighted metric, certified by the gradient-mapping bound G^2/(2 mu);
* the coverage coupling (convex piecewise linear in zeta): a Lagrangian
  search on the ball multiplier whose per-scenario subproblems are solved
  through a min-norm point in the base polytope.  The certificate is an
  explicit primal-dual gap.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import EuclideanMap, HolderModulus, MirrorMap, NormKind, ObjectiveOracle, Region, SolveReport, dual_norm
from .greedy import GradientPoint, GreedyConfig, continuous_greedy
from .mirror_prox import MirrorProxConfig, StepSchedule, Theory, _run

BALL_TOL = 1e-9


class InnerSolveError(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# couplings ---------------------------------------------------------------


class Coupling:
    """f(x, zeta), batched over scenario rows of ``zeta`` (shape (N, m))."""

    zeta_smoothness: float = math.inf

    def dim(self, m: int) -> int:
        return m

    def value(self, x, Z) -> np.ndarray:
        raise NotImplementedError

    def grad_x(self, x, Z) -> np.ndarray:
        raise NotImplementedError

    def grad_zeta(self, x, Z) -> np.ndarray:
        raise NotImplementedError


class LinearCoupling(Coupling):
    """f(x, zeta) = <zeta, x>."""

    zeta_smoothness = 0.0

    def value(self, x, Z):
        return Z @ x

    def grad_x(self, x, Z):
        return Z.copy()

    def grad_zeta(self, x, Z):
        return np.broadcast_to(x, Z.shape).copy()


@dataclass(frozen=True, eq=False)
class DecoupledCoupling(Coupling):
    """f(x, zeta) = <c, x>, independent of zeta."""

    c: np.ndarray
    zeta_smoothness = 0.0

    def dim(self, m):
        return np.asarray(self.c).size

    def value(self, x, Z):
        return np.full(Z.shape[0], float(np.asarray(self.c) @ x))

    def grad_x(self, x, Z):
        return np.tile(np.asarray(self.c, dtype=float), (Z.shape[0], 1))

    def grad_zeta(self, x, Z):
        return np.zeros_like(Z)


class CoverageCoupling(Coupling):
    """Multilinear extension of S -> max_{j in S} zeta_j, in closed form.

    For a fixed x the value is the Lovász extension of
    A -> 1 - prod_{j in A} (1 - x_j) evaluated at zeta, so it is convex and
    piecewise linear in zeta (nonsmooth at ties).  ``grad_zeta`` returns a
    subgradient with ties ordered by index.
    """

    zeta_smoothness = math.inf

    def value(self, x, Z):
        return kernels.coverage_lovasz(np.asarray(x, dtype=float), np.ascontiguousarray(Z, dtype=float))[0]

    def grad_x(self, x, Z):
        return kernels.coverage_lovasz(np.asarray(x, dtype=float), np.ascontiguousarray(Z, dtype=float))[1]

    def grad_zeta(self, x, Z):
        return kernels.coverage_lovasz(np.asarray(x, dtype=float), np.ascontiguousarray(Z, dtype=float))[2]


# instance ---------------------------------------------------------------


@dataclass(frozen=True)
class DroConstants:
    L1: float
    lambda1: float
    lambda2: float
    L2: float
    estimated: bool = False


@dataclass(frozen=True, eq=False)
class DroInstance:
    samples: np.ndarray
    weights: np.ndarray
    theta: float
    box_lo: np.ndarray
    box_hi: np.ndarray
    coupling: Coupling
    constants: DroConstants
    eps: float
    norm: NormKind = NormKind.L1

    def __post_init__(self):
        xi = np.atleast_2d(np.array(self.samples, dtype=float))
        n, m = xi.shape
        p = np.array(self.weights, dtype=float).reshape(-1)
        lo = np.broadcast_to(np.array(self.box_lo, dtype=float), (m,)).copy()
        hi = np.broadcast_to(np.array(self.box_hi, dtype=float), (m,)).copy()
        if p.size != n:
            raise ValueError("one weight per sample is required")
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        if not (self.theta > 0 and self.eps > 0):
            raise ValueError("theta and eps must be positive")
        if np.any(lo > hi) or np.any(xi < lo) or np.any(xi > hi):
            raise ValueError("samples must lie in the sample box")
        for a in (xi, p, lo, hi):
            a.setflags(write=False)
        object.__setattr__(self, "samples", xi)
        object.__setattr__(self, "weights", p)
        object.__setattr__(self, "box_lo", lo)
        object.__setattr__(self, "box_hi", hi)

    @property
    def n_scenarios(self) -> int:
        return self.samples.shape[0]

    @property
    def m(self) -> int:
        return self.samples.shape[1]

    @property
    def d(self) -> int:
        return self.coupling.dim(self.m)

    @property
    def reg(self) -> float:
        """eps / (2 theta^2)."""
        return self.eps / (2.0 * self.theta**2)

    def with_eps(self, eps: float) -> "DroInstance":
        return dataclasses.replace(self, eps=eps)


@dataclass(frozen=True, eq=False)
class ScenarioBlock:
    zeta: np.ndarray
    converged: bool = True


@dataclass(frozen=True, eq=False)
class InnerResult:
    block: ScenarioBlock
    r_value: float
    certified_gap: float
    iterations: int
    converged: bool
    x: np.ndarray
    method: str


def transport(inst: DroInstance, Z) -> float:
    """sum_i p_i ||xi_i - zeta_i||^2."""
    D = np.asarray(Z, dtype=float) - inst.samples
    return float(inst.weights @ np.einsum("ij,ij->i", D, D))


def in_Z(inst: DroInstance, Z, tol: float = BALL_TOL) -> bool:
    Z = np.asarray(Z, dtype=float)
    if Z.shape != inst.samples.shape:
        return False
    in_box = np.all(Z >= inst.box_lo - tol) and np.all(Z <= inst.box_hi + tol)
    return bool(in_box and transport(inst, Z) <= inst.theta**2 + tol)


def _block_array(inst, block) -> np.ndarray:
    Z = block.zeta if isinstance(block, ScenarioBlock) else np.asarray(block, dtype=float)
    return np.atleast_2d(np.asarray(Z, dtype=float))


def eval_R(inst: DroInstance, x, block) -> float:
    Z = _block_array(inst, block)
    if not in_Z(inst, Z):
        raise ValueError("scenario block is outside Z")
    x = np.asarray(x, dtype=float)
    D = Z - inst.samples
    per = inst.coupling.value(x, Z) + inst.reg * np.einsum("ij,ij->i", D, D)
    return float(inst.weights @ per)


def project_Z(inst: DroInstance, raw, max_sweeps: int = 200, tol: float = 1e-10) -> ScenarioBlock:
    """Dykstra alternation between the p-weighted ball and the box.

    Both projections are exact in the p-weighted metric (radial scaling and a
    per-coordinate clip).  A final radial shrink towards the samples removes
    any leftover ball violation without leaving the box.
    """
    xi, p, th2 = inst.samples, inst.weights, inst.theta**2
    lo, hi = inst.box_lo, inst.box_hi
    y = np.array(raw, dtype=float).reshape(xi.shape)
    if not np.all(np.isfinite(y)):
        raise ValueError("raw block has non-finite entries")

    def ball(z):
        r2 = transport(inst, z)
        return z if r2 <= th2 else xi + (z - xi) * math.sqrt(th2 / r2)

    P = np.zeros_like(y)
    Q = np.zeros_like(y)
    converged = False
    for _ in range(max_sweeps):
        a = ball(y + P)
        P = y + P - a
        b = np.clip(a + Q, lo, hi)
        Q = a + Q - b
        change = float(np.abs(b - y).max())
        y = b
        if change < tol:
            converged = True
            break
    viol = transport(inst, y) - th2
    if viol > 0:
        y = xi + (y - xi) * math.sqrt(th2 / transport(inst, y)) * (1 - 1e-15)
    return ScenarioBlock(y, converged=converged or viol <= 1e-6)


def _uniform_bounds(inst):
    lo, hi = inst.box_lo, inst.box_hi
    if np.ptp(lo) > 0 or np.ptp(hi) > 0:
        raise ValueError("the coverage inner solver needs the same bounds on every coordinate")
    return float(lo[0]), float(hi[0])


def _inner_coverage(inst, x, delta, max_bisect=200):
    lo, hi = _uniform_bounds(inst)
    c = inst.reg
    lam_hi = max(1.0 / (2.0 * inst.theta) - c, 1e-12) * 1.05
    Z, primal, gap, its, _ = kernels.coverage_inner(
        x, np.ascontiguousarray(inst.samples), inst.weights, c, inst.theta**2, lo, hi, float(delta), lam_hi, 1e-12, 1000, max_bisect
    )
    return Z, float(primal), float(gap), int(its)


def _inner_pgd(inst, x, delta, warm, max_iter):
    c = inst.reg
    mu = 2.0 * c
    lam = inst.coupling.zeta_smoothness + 2.0 * c
    xi, p = inst.samples, inst.weights
    Z = xi.copy() if warm is None or not in_Z(inst, warm) else np.array(warm, dtype=float)
    for k in range(1, max_iter + 1):
        G = inst.coupling.grad_zeta(x, Z) + 2.0 * c * (Z - xi)
        Zn = project_Z(inst, Z - G / lam).zeta
        D = Z - Zn
        gmap = lam * math.sqrt(max(float(p @ np.einsum("ij,ij->i", D, D)), 0.0))
        cert = gmap**2 / (2.0 * mu)
        Z = Zn
        if cert <= delta:
            return Z, cert, k, True
    return Z, cert, max_iter, False


def inner_solve(inst: DroInstance, x, delta_target: float, warm=None, max_iter: int = 100_000) -> InnerResult:
    """Find a block in Z whose R value is within a certified gap of H(x)."""
    if not delta_target > 0:
        raise ValueError("delta_target must be positive")
    x = np.array(x, dtype=float).reshape(-1)
    if x.size != inst.d:
        raise ValueError(f"x has dimension {x.size}, expected {inst.d}")
    if math.isfinite(inst.coupling.zeta_smoothness):
        Z, gap, its, ok = _inner_pgd(inst, x, delta_target, warm, max_iter)
        method = "pgd"
    elif isinstance(inst.coupling, CoverageCoupling):
        Z, _, gap, its = _inner_coverage(inst, x, delta_target)
        ok = gap <= delta_target
        method = "lagrangian"
    else:
        raise NotImplementedError("nonsmooth couplings other than coverage have no inner solver")
    res = InnerResult(ScenarioBlock(Z), eval_R(inst, x, Z), float(gap), its, ok, x, method)
    if not ok:
        raise InnerSolveError(f"inner solve stopped with certified gap {gap:.3e} > {delta_target:.3e} after {its} iterations", res)
    return res


def eval_H(inst: DroInstance, x, delta_target: float) -> float:
    return inner_solve(inst, x, delta_target).r_value


def approx_grad_H(inst: DroInstance, x, inner: InnerResult) -> np.ndarray:
    """sum_i p_i grad_x f(x, zeta_i) at the inner solution computed for this x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.array_equal(x, inner.x):
        raise ValueError("inner result was computed at a different x")
    return inst.weights @ inst.coupling.grad_x(x, inner.block.zeta)


def grad_error_bound(inst: DroInstance, delta: float) -> float:
    """lambda2 theta sqrt(2 delta / eps)."""
    return inst.constants.lambda2 * inst.theta * math.sqrt(2.0 * delta / inst.eps)


def h_modulus(inst: DroInstance) -> HolderModulus:
    k = inst.constants
    terms = [(k.lambda1, 1.0), (2.0 * k.lambda2 * inst.theta * math.sqrt(k.L1 / inst.eps), 0.5)]
    terms = [t for t in terms if t[0] > 0]
    if not terms:
        raise ValueError("all modulus coefficients vanish")
    return HolderModulus(tuple(terms))


def estimate_constants(coupling: Coupling, samples, box_lo, box_hi, region: Region, norm: NormKind = NormKind.L1, n: int = 2000, seed: int = 0, safety: float = 1.1) -> DroConstants:
    """Sampled Lipschitz-type constants, inflated by ``safety`` and flagged as estimated."""
    rng = np.random.default_rng(seed)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    m = samples.shape[1]
    lo = np.where(np.isfinite(box_lo), box_lo, samples.min(0) - 1.0)
    hi = np.where(np.isfinite(box_hi), box_hi, samples.max(0) + 1.0)
    X = region.sample(rng, 2 * n)
    Z = lo + rng.random((2 * n, m)) * (hi - lo)
    L1 = l1 = l2 = L2 = 0.0
    for i in range(n):
        x1, x2, z1, z2 = X[2 * i], X[2 * i + 1], Z[2 * i : 2 * i + 1], Z[2 * i + 1 : 2 * i + 2]
        g11 = coupling.grad_x(x1, z1)[0]
        L1 = max(L1, dual_norm(norm, g11))
        dx = np.linalg.norm(x1 - x2, norm.order)
        if dx > 0:
            l1 = max(l1, dual_norm(norm, g11 - coupling.grad_x(x2, z1)[0]) / dx)
        dz = np.linalg.norm(z1 - z2)
        if dz > 0:
            l2 = max(l2, dual_norm(norm, g11 - coupling.grad_x(x1, z2)[0]) / dz)
            L2 = max(L2, abs(coupling.value(x1, z1)[0] - coupling.value(x1, z2)[0]) / dz)
    return DroConstants(safety * L1, safety * l1, safety * l2, safety * L2, estimated=True)


# solvers ------------------------------------------------------------------


@dataclass
class DroOracle:
    """Inner solves with warm starts and a certificate log."""

    inst: DroInstance
    delta_target: float
    warm_start: bool = True
    max_iter: int = 100_000
    certificates: list = field(default_factory=list)
    _last: InnerResult | None = None
    outer_iteration: int = 0

    def inner(self, x) -> InnerResult:
        x = np.asarray(x, dtype=float).reshape(-1)
        if self._last is not None and np.array_equal(self._last.x, x):
            return self._last
        warm = self._last.block.zeta if (self.warm_start and self._last is not None) else None
        try:
            res = inner_solve(self.inst, x, self.delta_target, warm=warm, max_iter=self.max_iter)
        except InnerSolveError as e:
            raise InnerSolveError(f"outer iteration {self.outer_iteration}: {e}", e.result) from e
        self.certificates.append((self.outer_iteration, res.certified_gap, res.iterations))
        self._last = res
        return res

    def value(self, x) -> float:
        return self.inner(x).r_value

    def gradient(self, x) -> np.ndarray:
        return approx_grad_H(self.inst, x, self.inner(x))

    def as_objective(self) -> ObjectiveOracle:
        return ObjectiveOracle(
            value=self.value,
            supergradient=self.gradient,
            norm=self.inst.norm,
            modulus=h_modulus(self.inst),
            lipschitz=self.inst.constants.L1,
            delta=grad_error_bound(self.inst, self.delta_target),
            name="dro_H",
        )


def dro_continuous_greedy(
    inst: DroInstance,
    region: Region,
    T: int,
    delta_target: float,
    gradient_point: GradientPoint = GradientPoint.SCALED_PREV,
    record_trajectory: bool = True,
    inner_max_iter: int = 100_000,
) -> SolveReport:
    grad_oracle = DroOracle(inst, delta_target, max_iter=inner_max_iter)
    value_oracle = DroOracle(inst, delta_target, max_iter=inner_max_iter)
    obj = grad_oracle.as_objective()
    counter = iter(range(1, T + 1))

    def supergradient(y):
        grad_oracle.outer_iteration = value_oracle.outer_iteration = next(counter)
        return grad_oracle.gradient(y)

    obj = dataclasses.replace(obj, supergradient=supergradient, value=value_oracle.value)
    rep = continuous_greedy(obj, region, GreedyConfig(T, gradient_point, record_trajectory), name="dro_continuous_greedy")
    rep.config.update({"delta": delta_target, "theta": inst.theta, "eps": inst.eps})
    rep.extras["certificates"] = grad_oracle.certificates
    rep.extras["max_certified_gap"] = max((g for _, g, _ in grad_oracle.certificates), default=0.0)
    return rep


def dro_mirror_prox(
    inst: DroInstance,
    region: Region,
    T: int,
    delta_target: float,
    mirror: MirrorMap | None = None,
    schedule: StepSchedule | None = None,
    eval_delta: float | None = None,
    record_trajectory: bool = True,
    inner_max_iter: int = 100_000,
) -> SolveReport:
    """Mirror-prox on H; both half and full steps use approximate gradients.

    The window argmax compares H values evaluated at the fixed gap ``eval_delta``.
    """
    oracle = DroOracle(inst, delta_target, max_iter=inner_max_iter)
    evaluator = DroOracle(inst, eval_delta or delta_target, max_iter=inner_max_iter)
    cfg = MirrorProxConfig(T, schedule or Theory(h_modulus(inst)), mirror or EuclideanMap(), record_trajectory)

    def grad(x, _kind, t):
        oracle.outer_iteration = evaluator.outer_iteration = t
        return oracle.gradient(x)

    rep = _run(region, cfg, grad, evaluator.value, "dro_mirror_prox")
    rep.config.update({"delta": delta_target, "eval_delta": eval_delta or delta_target, "theta": inst.theta, "eps": inst.eps})
    rep.extras["certificates"] = oracle.certificates
    rep.extras["max_certified_gap"] = max((g for _, g, _ in oracle.certificates), default=0.0)
    return rep


__all__ = [
    "Coupling",
    "LinearCoupling",
    "DecoupledCoupling",
    "CoverageCoupling",
    "DroConstants",
    "DroInstance",
    "ScenarioBlock",
    "InnerResult",
    "InnerSolveError",
    "DroOracle",
    "transport",
    "in_Z",
    "eval_R",
    "project_Z",
    "inner_solve",
    "eval_H",
    "approx_grad_H",
    "grad_error_bound",
    "h_modulus",
    "estimate_constants",
    "dro_continuous_greedy",
    "dro_mirror_prox",
]
