import itertools
import os
import subprocess
import sys

import cvxpy as cp
import numpy as np
import pytest

from upconcave import kernels

from _oracles import greedy_vertices

IMPLS = [kernels.numpy_impl] + ([kernels.numba_impl] if kernels.numba_impl is not None else [])
impl_param = pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.__name__.rsplit("_", 1)[-1])


def coverage_enum(x, r):
    m = x.size
    tot = 0.0
    for mask in range(1 << m):
        S = [j for j in range(m) if mask >> j & 1]
        pr = np.prod([x[j] if j in S else 1 - x[j] for j in range(m)])
        tot += pr * max((r[j] for j in S), default=0.0)
    return tot


@impl_param
def test_capped_simplex_projection_matches_qp(impl, rng):
    for _ in range(20):
        d = int(rng.integers(2, 9))
        cap = float(rng.uniform(0.3, 2.0))
        budget = float(rng.uniform(0.1, cap * d))
        y = rng.normal(scale=2.0, size=d)
        got = impl.capped_simplex_project(y, cap, budget, 100, 1e-13)
        z = cp.Variable(d)
        cp.Problem(cp.Minimize(cp.sum_squares(z - y)), [z >= 0, z <= cap, cp.sum(z) == budget]).solve(solver=cp.CLARABEL)
        assert abs(got.sum() - budget) <= 1e-10
        assert np.all(got >= 0) and np.all(got <= cap)
        np.testing.assert_allclose(got, z.value, atol=1e-6)


@impl_param
def test_coverage_lovasz_matches_enumeration(impl, rng):
    for _ in range(10):
        m = int(rng.integers(1, 7))
        x = rng.random(m)
        Z = rng.uniform(0, 5, size=(3, m))
        val, gx, gz = impl.coverage_lovasz(x, Z)
        for i in range(3):
            assert val[i] == pytest.approx(coverage_enum(x, Z[i]), abs=1e-12)
            h = 1e-6
            fd = [(coverage_enum(x + h * e, Z[i]) - coverage_enum(x - h * e, Z[i])) / (2 * h) for e in np.eye(m)]
            np.testing.assert_allclose(gx[i], fd, atol=1e-7)
            # linear in zeta on the ordering cell, so the zeta-gradient reproduces the value
            assert gz[i] @ Z[i] == pytest.approx(val[i], abs=1e-12)


@impl_param
def test_multilinear_table_kernels(impl, rng):
    m = 5
    table = rng.random(1 << m)
    table[0] = 0.0
    x = rng.random(m)
    ref = sum(
        table[mask] * np.prod([x[j] if mask >> j & 1 else 1 - x[j] for j in range(m)]) for mask in range(1 << m)
    )
    assert impl.multilinear_value(table, x) == pytest.approx(ref, abs=1e-12)
    h = 1e-6
    fd = [(impl.multilinear_value(table, x + h * e) - impl.multilinear_value(table, x - h * e)) / (2 * h) for e in np.eye(m)]
    np.testing.assert_allclose(impl.multilinear_grad(table, x), fd, atol=1e-8)


@impl_param
def test_coverage_marginals_bruteforce(impl, rng):
    r = rng.uniform(0, 4, 6)
    masks = rng.random((40, 6)) < 0.4
    masks[0] = False
    f = lambda s: max((r[j] for j in range(6) if s[j]), default=0.0)  # noqa: E731
    val, marg = impl.coverage_marginals(masks, r)
    for i, s in enumerate(masks):
        assert val[i] == f(s)
        for j in range(6):
            up, dn = s.copy(), s.copy()
            up[j], dn[j] = True, False
            assert marg[i, j] == pytest.approx(f(up) - f(dn))


@impl_param
def test_base_projection_matches_qp(impl, rng):
    for _ in range(5):
        m = int(rng.integers(2, 6))
        x = rng.random(m)
        y = rng.normal(size=m)
        V = greedy_vertices(x)
        lam = cp.Variable(len(V), nonneg=True)
        cp.Problem(cp.Minimize(cp.sum_squares(V.T @ lam - y)), [cp.sum(lam) == 1]).solve(solver=cp.CLARABEL)
        s, gap, _ = impl.base_projection(x, y, 1e-14, 1000)
        np.testing.assert_allclose(s, V.T @ lam.value, atol=1e-6)
        assert s.sum() == pytest.approx(1 - np.prod(1 - x))


@impl_param
def test_grid_max_quadratic_exhaustive(impl, rng):
    for d in (1, 2, 3):
        M = rng.normal(size=(d, d))
        A = M + M.T
        b = rng.normal(size=d)
        lo, hi, n = np.zeros(d), np.ones(d) * 1.5, 7
        val, idx = impl.grid_max_quadratic(A, b, 0.3, lo, hi, n)
        axis = np.linspace(0, 1.5, n)
        best = max(0.5 * np.array(p) @ A @ np.array(p) + b @ np.array(p) + 0.3 for p in itertools.product(axis, repeat=d))
        assert val == pytest.approx(best, abs=1e-12)
        p = axis[idx]
        assert 0.5 * p @ A @ p + b @ p + 0.3 == pytest.approx(val, abs=1e-12)


@pytest.mark.skipif(kernels.numba_impl is None, reason="numba not installed")
def test_backends_agree_on_coverage_inner(rng):
    x = rng.random(4)
    xi = rng.uniform(1, 5, (3, 4))
    p = np.array([0.2, 0.3, 0.5])
    args = (x, xi, p, 0.3, 0.5, 1.0, 5.0, 1e-9, 2.0, 1e-12, 1000, 200)
    a = kernels.numpy_impl.coverage_inner(*args)
    b = kernels.numba_impl.coverage_inner(*args)
    np.testing.assert_allclose(a[0], b[0], atol=1e-9)
    assert a[1] == pytest.approx(b[1], abs=1e-9)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, UPCONCAVE_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c", "import upconcave.kernels as k; print(k.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_env_flag_rejects_unknown_backend():
    env = dict(os.environ, UPCONCAVE_BACKEND="cuda")
    out = subprocess.run([sys.executable, "-c", "import upconcave"], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "UPCONCAVE_BACKEND" in out.stderr
