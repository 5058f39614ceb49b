"""Vectorised numpy kernels (no compilation).

The min-norm-point and coverage inner solve are inherently sequential; they
run as plain Python from ``_loops``.
"""
import numpy as np

from ._loops import base_projection, coverage_inner  # noqa: F401


def capped_simplex_project(y, cap, budget, max_iter, tol):
    # exact: s(t) = sum clip(y - t, 0, cap) is piecewise linear with kinks at y_i and y_i - cap
    n = y.size
    ys = np.sort(y)
    cs = np.concatenate(([0.0], np.cumsum(ys)))
    t = np.unique(np.concatenate((ys - cap, ys)))
    lo = np.searchsorted(ys, t, side="right")
    hi = np.searchsorted(ys, t + cap, side="right")
    s = cap * (n - hi) + (cs[hi] - cs[lo]) - (hi - lo) * t
    k = int(np.argmax(s <= budget))
    if k == 0:
        tau = t[0]
    else:
        t0, t1, s0, s1 = t[k - 1], t[k], s[k - 1], s[k]
        tau = t0 + (s0 - budget) * (t1 - t0) / (s0 - s1)
    return np.clip(y - tau, 0.0, cap)


def coverage_lovasz(x, zeta):
    n, m = zeta.shape
    order = np.argsort(-zeta, axis=1, kind="stable")
    zs = np.take_along_axis(zeta, order, axis=1)
    xs = x[order]
    keep = np.cumprod(1.0 - xs, axis=1)
    prefix = np.ones((n, m))
    prefix[:, 1:] = keep[:, :-1]
    w = xs * prefix
    val = (zs * w).sum(axis=1)
    tail = np.zeros((n, m + 1))
    for k in range(m - 1, -1, -1):
        tail[:, k] = zs[:, k] * xs[:, k] + (1.0 - xs[:, k]) * tail[:, k + 1]
    gxs = prefix * (zs - tail[:, 1:])
    rows = np.arange(n)[:, None]
    gx = np.empty((n, m))
    gz = np.empty((n, m))
    gx[rows, order] = gxs
    gz[rows, order] = w
    return val, gx, gz


def _as_tensor(table, m):
    # axis k of the reshaped table is bit (m - 1 - k) of the mask
    return table.reshape((2,) * m)


def multilinear_value(table, x):
    m = x.shape[0]
    t = _as_tensor(table, m)
    for k in range(m):
        j = m - 1 - k
        t = np.tensordot(np.array([1.0 - x[j], x[j]]), t, axes=(0, 0))
    return float(t)


def multilinear_grad(table, x):
    m = x.shape[0]
    out = np.empty(m)
    base = _as_tensor(table, m)
    for j in range(m):
        t = base
        for k in range(m):
            bit = m - 1 - k
            vec = np.array([-1.0, 1.0]) if bit == j else np.array([1.0 - x[bit], x[bit]])
            t = np.tensordot(vec, t, axes=(0, 0))
        out[j] = float(t)
    return out


def coverage_marginals(masks, r):
    b, m = masks.shape
    vals = np.where(masks, r[None, :], -np.inf)
    order = np.argsort(-vals, axis=1, kind="stable")
    arg = order[:, 0]
    rows = np.arange(b)
    top1 = vals[rows, arg]
    top2 = vals[rows, order[:, 1]] if m > 1 else np.full(b, -np.inf)
    empty = ~masks.any(axis=1)
    top1 = np.where(empty, 0.0, top1)
    top2 = np.where(np.isfinite(top2), top2, 0.0)
    marg = np.where(masks, 0.0, np.maximum(r[None, :] - top1[:, None], 0.0))
    hit = ~empty
    marg[rows[hit], arg[hit]] = top1[hit] - top2[hit]
    return top1, marg


def grid_max_quadratic(A, b, c, lo, hi, n, chunk=1 << 18):
    d = b.shape[0]
    h = (hi - lo) / (n - 1) if n > 1 else np.ones(d)
    last = d - 1
    quad = 0.5 * A[last, last]
    n_outer = n ** last
    best = -np.inf
    best_idx = np.zeros(d, dtype=np.int64)
    ks = np.arange(n)
    for start in range(0, n_outer, chunk):
        flat = np.arange(start, min(start + chunk, n_outer))
        idx = np.stack(np.unravel_index(flat, (n,) * last), axis=1) if last else np.zeros((flat.size, 0), int)
        x = lo[:last] + idx * h[:last]
        Ax = x @ A[:last, :last]
        base = c + x @ b[:last] + 0.5 * np.einsum("ij,ij->i", Ax, x)
        lin = b[last] + x @ A[:last, last]
        if quad < 0.0:
            kf = np.floor((-lin / (2.0 * quad) - lo[last]) / h[last]).astype(np.int64)
            cand = np.stack([kf, kf + 1], axis=1)
        else:
            cand = np.tile(np.array([0, n - 1]), (flat.size, 1))
        cand = np.clip(cand, 0, n - 1)
        z = lo[last] + cand * h[last]
        v = base[:, None] + lin[:, None] * z + quad * z * z
        pick = np.argmax(v, axis=1)
        vals = v[np.arange(flat.size), pick]
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = float(vals[i])
            best_idx[:last] = idx[i]
            best_idx[last] = cand[i, pick[i]]
    return best, best_idx
