"""Loop-form kernels written in the numba-compatible subset of Python.

``_numba`` compiles these with ``njit``; ``_numpy`` re-exports the ones that
have no natural vectorised form and runs them as plain Python.
"""
import numpy as np


def capped_simplex_project(y, cap, budget, max_iter, tol):
    d = y.shape[0]
    lo = y.min() - cap
    hi = y.max()
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        s = 0.0
        for i in range(d):
            v = y[i] - mid
            if v > cap:
                v = cap
            elif v < 0.0:
                v = 0.0
            s += v
        if s > budget:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    # exact multiplier on the free set, kept only if it reproduces the same partition
    n_free = 0
    n_cap = 0
    free_sum = 0.0
    for i in range(d):
        v = y[i] - tau
        if v >= cap:
            n_cap += 1
        elif v > 0.0:
            n_free += 1
            free_sum += y[i]
    if n_free > 0:
        t2 = (free_sum - (budget - cap * n_cap)) / n_free
        same = True
        for i in range(d):
            v1 = y[i] - tau
            v2 = y[i] - t2
            c1 = 2 if v1 >= cap else (1 if v1 > 0.0 else 0)
            c2 = 2 if v2 >= cap else (1 if v2 > 0.0 else 0)
            if c1 != c2:
                same = False
                break
        if same:
            tau = t2
    out = np.empty(d)
    for i in range(d):
        v = y[i] - tau
        if v > cap:
            v = cap
        elif v < 0.0:
            v = 0.0
        out[i] = v
    return out


def coverage_lovasz(x, zeta):
    """Closed-form coverage extension for each row of ``zeta``.

    Returns value (N,), gradient in x (N, m), gradient in zeta (N, m).
    """
    n, m = zeta.shape
    val = np.zeros(n)
    gx = np.zeros((n, m))
    gz = np.zeros((n, m))
    tail = np.zeros(m + 1)
    for r in range(n):
        order = np.argsort(-zeta[r], kind="mergesort")
        p = 1.0
        for k in range(m):
            j = order[k]
            w = x[j] * p
            gz[r, j] = w
            val[r] += zeta[r, j] * w
            gx[r, j] = p
            p *= 1.0 - x[j]
        tail[m] = 0.0
        for k in range(m - 1, -1, -1):
            j = order[k]
            tail[k] = zeta[r, j] * x[j] + (1.0 - x[j]) * tail[k + 1]
        for k in range(m):
            j = order[k]
            gx[r, j] *= zeta[r, j] - tail[k + 1]
    return val, gx, gz


def _greedy_vertex(x, w):
    # vertex of B(g_x) minimising <w, s>: greedy fill in increasing w, ties by index
    m = x.shape[0]
    order = np.argsort(w, kind="mergesort")
    out = np.empty(m)
    p = 1.0
    for k in range(m):
        j = order[k]
        out[j] = x[j] * p
        p *= 1.0 - x[j]
    return out


def _affine_minimizer(G, k):
    # argmin ||sum a_i p_i|| subject to sum a_i = 1, from the bordered Gram system
    A = np.ones((k + 1, k + 1))
    A[:k, :k] = G[:k, :k]
    A[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    ok = True
    sol = rhs
    try:
        sol = np.linalg.solve(A, rhs)
    except Exception:  # noqa: BLE001 - singular corral
        ok = False
    if ok:
        res = A @ sol - rhs
        if not np.all(np.isfinite(sol)) or np.dot(res, res) > 1e-20:
            ok = False
    if not ok:
        sol = np.linalg.lstsq(A, rhs, -1.0)[0]
    return sol[:k]


def _minor_cycles(S, P, lam, G, k):
    # Wolfe minor cycles: move toward the affine minimiser, dropping vertices that leave the hull
    while True:
        a = _affine_minimizer(G, k)
        if a.min() > 1e-15:
            lam[:k] = a
            break
        step = 1.0
        for i in range(k):
            if a[i] <= 1e-15:
                den = lam[i] - a[i]
                if den > 0.0:
                    t = lam[i] / den
                    if t < step:
                        step = t
        for i in range(k):
            lam[i] = lam[i] + step * (a[i] - lam[i])
        keep = np.empty(k, dtype=np.int64)
        j = 0
        for i in range(k):
            if lam[i] > 1e-15:
                keep[j] = i
                j += 1
        for r in range(j):
            src = keep[r]
            S[r] = S[src]
            P[r] = P[src]
            lam[r] = lam[src]
        k = j
        # rebuild the compacted Gram block exactly; cheap next to the solve
        for r in range(k):
            for c in range(r, k):
                g = np.dot(P[r], P[c])
                G[r, c] = g
                G[c, r] = g
        tot = lam[:k].sum()
        lam[:k] /= tot
        if k == 1:
            break
    return k


def _mnp(x, y, S, lam, k, G, tol, max_iter):
    """Wolfe min-norm point of B(g_x) - y, resuming from the corral (S[:k], lam[:k]).

    ``S`` holds unshifted base vertices, so a corral stays valid when ``y``
    changes.  ``S``, ``lam`` and ``G`` are updated in place; returns
    (projection of y, wolfe gap, iterations, corral size).
    """
    m = x.shape[0]
    P = np.empty((m + 2, m))
    if k == 0:
        S[0] = _greedy_vertex(x, -y)
        lam[0] = 1.0
        k = 1
    for i in range(k):
        P[i] = S[i] - y
    for i in range(k):
        for j in range(i, k):
            v = np.dot(P[i], P[j])
            G[i, j] = v
            G[j, i] = v
    if k > 1:
        # a resumed corral: its weights were optimal for the previous y, not this one
        k = _minor_cycles(S, P, lam, G, k)
    q = np.zeros(m)
    for i in range(k):
        q += lam[i] * P[i]
    gap = np.inf
    it = 0
    for it in range(max_iter):
        s = _greedy_vertex(x, q)
        v = s - y
        gap = np.dot(q, q) - np.dot(q, v)
        if gap <= tol * (1.0 + np.dot(v, v)) or k >= m + 2:
            break
        S[k] = s
        P[k] = v
        lam[k] = 0.0
        for i in range(k + 1):
            g = np.dot(P[i], v)
            G[i, k] = g
            G[k, i] = g
        k += 1
        k = _minor_cycles(S, P, lam, G, k)
        q = np.zeros(m)
        for i in range(k):
            q += lam[i] * P[i]
    return q + y, gap, it + 1, k


def base_projection(x, y, tol, max_iter):
    """Wolfe min-norm point: projection of ``y`` onto B(g), g(A) = 1 - prod_{j in A}(1 - x_j).

    Returns (s, wolfe_gap, iterations).
    """
    m = x.shape[0]
    S = np.zeros((m + 2, m))
    lam = np.zeros(m + 2)
    G = np.zeros((m + 2, m + 2))
    s, gap, its, _ = _mnp(x, y, S, lam, 0, G, tol, max_iter)
    return s, gap, its


def _scenario_bounds(x, xi, a, lo, hi, tol, max_iter, S, lam, k, G):
    # per-scenario prox of the Lovasz extension at weight a; returns zeta, lower, upper, dist2, f_L, corral size
    m = xi.shape[0]
    s, _, _, k = _mnp(x, 2.0 * a * xi, S, lam, k, G, tol, max_iter)
    z = np.empty(m)
    for j in range(m):
        v = xi[j] - s[j] / (2.0 * a)
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        z[j] = v
    dist2 = 0.0
    for j in range(m):
        dist2 += (z[j] - xi[j]) ** 2
    lower = np.dot(s, z) + a * dist2
    zz = np.empty((1, m))
    zz[0] = z
    fl = coverage_lovasz(x, zz)[0][0]
    upper = fl + a * dist2
    return z, lower, upper, dist2, fl, k


def coverage_inner(x, xi, p, c, theta2, lo, hi, delta, lam_hi, mnp_tol, mnp_iter, max_bisect):
    """Minimise sum_i p_i (f_L(zeta_i) + c ||zeta_i - xi_i||^2) over the coupled ball and box.

    Lagrangian search over the ball multiplier.  Returns
    (zeta, primal, certified_gap, iterations, transport).
    """
    n, m = xi.shape
    best_z = xi.copy()
    best_primal = np.inf
    best_dual = -np.inf
    best_r = 0.0
    z = np.empty((n, m))
    S = np.zeros((n, m + 2, m))
    lams = np.zeros((n, m + 2))
    ks = np.zeros(n, dtype=np.int64)
    G = np.zeros((m + 2, m + 2))
    lo_l = 0.0
    hi_l = lam_hi
    lam = 0.0
    it = 0
    for it in range(max_bisect + 1):
        a = c + lam
        r = 0.0
        low = 0.0
        prim = 0.0
        for i in range(n):
            zi, lw, up, d2, fl, ks[i] = _scenario_bounds(x, xi[i], a, lo, hi, mnp_tol, mnp_iter, S[i], lams[i], ks[i], G)
            z[i] = zi
            r += p[i] * d2
            low += p[i] * lw
            prim += p[i] * (fl + c * d2)
        dual = low - lam * theta2
        if dual > best_dual:
            best_dual = dual
        if r <= theta2 and prim < best_primal:
            best_primal = prim
            best_z[:, :] = z
            best_r = r
        if best_primal - best_dual <= delta:
            break
        if it == 0:
            if r <= theta2:
                # ball inactive at lam = 0; only the inner projections can tighten
                mnp_tol *= 0.01
                continue
            lam = hi_l
            continue
        if r > theta2:
            lo_l = lam
        else:
            hi_l = lam
        lam = 0.5 * (lo_l + hi_l)
    return best_z, best_primal, max(best_primal - best_dual, 0.0), it + 1, best_r


def multilinear_value(table, x):
    m = x.shape[0]
    size = 1 << m
    prob = np.ones(size)
    for j in range(m):
        bit = 1 << j
        for mask in range(bit):
            prob[mask | bit] = prob[mask] * x[j]
            prob[mask] = prob[mask] * (1.0 - x[j])
    tot = 0.0
    for mask in range(size):
        tot += prob[mask] * table[mask]
    return tot


def multilinear_grad(table, x):
    m = x.shape[0]
    size = 1 << m
    half = size >> 1
    out = np.zeros(m)
    prob = np.empty(half)
    for j in range(m):
        # probabilities of the other coordinates, indexed by the mask with bit j removed
        prob[0] = 1.0
        filled = 1
        for l in range(m):
            if l == j:
                continue
            for mask in range(filled):
                prob[mask + filled] = prob[mask] * x[l]
                prob[mask] = prob[mask] * (1.0 - x[l])
            filled *= 2
        low_mask = (1 << j) - 1
        tot = 0.0
        for c in range(half):
            full = ((c & ~low_mask) << 1) | (c & low_mask)
            tot += prob[c] * (table[full | (1 << j)] - table[full])
        out[j] = tot
    return out


def coverage_marginals(masks, r):
    """Per-sample f(S) and f(S + j) - f(S - j) for f(S) = max_{j in S} r_j."""
    b, m = masks.shape
    val = np.zeros(b)
    marg = np.zeros((b, m))
    for s in range(b):
        top1 = 0.0
        top2 = 0.0
        arg = -1
        for j in range(m):
            if masks[s, j]:
                if arg < 0 or r[j] > top1:
                    if arg >= 0:
                        top2 = top1
                    top1 = r[j]
                    arg = j
                elif r[j] > top2:
                    top2 = r[j]
        val[s] = top1
        for j in range(m):
            if masks[s, j]:
                if j == arg:
                    marg[s, j] = top1 - top2
            else:
                d = r[j] - top1
                marg[s, j] = d if d > 0.0 else 0.0
    return val, marg


def _best_on_line(base, lin, quad, lo, h, n):
    # max of base + lin*z + quad*z^2 over z = lo + k*h, k = 0..n-1; lowest k wins ties
    best = -np.inf
    bk = 0
    if quad < 0.0:
        zs = -lin / (2.0 * quad)
        kf = (zs - lo) / h
        k0 = int(np.floor(kf))
        cands = (k0, k0 + 1)
    else:
        cands = (0, n - 1)
    for k in cands:
        if k < 0:
            k = 0
        if k > n - 1:
            k = n - 1
        z = lo + k * h
        v = base + lin * z + quad * z * z
        if v > best or (v == best and k < bk):
            best = v
            bk = k
    return best, bk


def grid_max_quadratic(A, b, c, lo, hi, n):
    """Exact max of 0.5 x'Ax + b'x + c over the product grid with n points per axis."""
    d = b.shape[0]
    h = np.empty(d)
    for i in range(d):
        h[i] = (hi[i] - lo[i]) / (n - 1) if n > 1 else 1.0
    idx = np.zeros(d, dtype=np.int64)
    best = -np.inf
    best_idx = np.zeros(d, dtype=np.int64)
    x = lo.copy()
    last = d - 1
    quad = 0.5 * A[last, last]
    while True:
        base = c
        lin = b[last]
        for i in range(last):
            base += b[i] * x[i] + 0.5 * A[i, i] * x[i] * x[i]
            for j in range(i + 1, last):
                base += A[i, j] * x[i] * x[j]
            lin += A[i, last] * x[i]
        v, k = _best_on_line(base, lin, quad, lo[last], h[last], n)
        if v > best:
            best = v
            best_idx[:last] = idx[:last]
            best_idx[last] = k
        # odometer over the leading d-1 axes
        pos = last - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < n:
                x[pos] = lo[pos] + idx[pos] * h[pos]
                break
            idx[pos] = 0
            x[pos] = lo[pos]
            pos -= 1
        if pos < 0:
            break
    return best, best_idx
