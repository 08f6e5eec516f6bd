"""Compiled shot loop for fidelity-estimation experiments.

Every routine here mirrors its engine twin (sympl, stab, gadget) operation for
operation, including the order of rng draws, so a compiled run and the pure
python path produce identical shot values from the same seed. Vectors use the
z-then-x layout mod d throughout; the magic-site trace is the only complex
step.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

KERNEL_FLAGS = dict(cache=True, nogil=True)


@njit(**KERNEL_FLAGS)
def _inv_table(d):
    inv = np.zeros(d, dtype=np.int64)
    for a in range(1, d):
        for b in range(1, d):
            if a * b % d == 1:
                inv[a] = b
                break
    return inv


@njit(**KERNEL_FLAGS)
def _sprod(a, b, d):
    n = a.size // 2
    s = 0
    for i in range(n):
        s += a[i] * b[n + i] - a[n + i] * b[i]
    return s % d


@njit(**KERNEL_FLAGS)
def _tv_apply(lam, h, x, d):
    f = lam * _sprod(x, h, d) % d
    return (x + f * h) % d


@njit(**KERNEL_FLAGS)
def _coord_scan(x, y, n, d, lo):
    w = np.zeros(2 * n, dtype=np.int64)
    fx = -1
    fy = -1
    for half in range(2):
        for j in range(lo, n):
            k = j if half == 0 else n + j
            px = (-x[n + j]) % d if half == 0 else x[j] % d
            py = (-y[n + j]) % d if half == 0 else y[j] % d
            if px != 0 and py != 0:
                w[k] = 1
                return w
            if px != 0 and py == 0 and fx < 0:
                fx = k
            if py != 0 and px == 0 and fy < 0:
                fy = k
    w[fx] = 1
    w[fy] = 1
    return w


@njit(**KERNEL_FLAGS)
def _find_transvections(x, y, n, d, lo, inv, lams, hs, base):
    """Write <= 2 transvections mapping x to y at slot base; returns the count."""
    same = True
    for j in range(2 * n):
        if x[j] != y[j]:
            same = False
            break
    if same:
        return 0
    s = _sprod(x, y, d)
    if s != 0:
        lams[base] = inv[s]
        hs[base] = (y - x) % d
        return 1
    w = _coord_scan(x, y, n, d, lo)
    lams[base] = inv[_sprod(x, w, d)]
    hs[base] = (w - x) % d
    lams[base + 1] = inv[_sprod(w, y, d)]
    hs[base + 1] = (y - w) % d
    return 2


@njit(**KERNEL_FLAGS)
def _pair_map(v, u, i, n, d, inv, lams, hs, base):
    """Write the transvections sending (e_z_i, e_x_i) to (v, u); returns the count.

    Layout matches the engine: stage2 entries first, then stage1, the whole run
    applied left to right.
    """
    two = 2 * n
    e = np.zeros(two, dtype=np.int64)
    f = np.zeros(two, dtype=np.int64)
    e[i] = 1
    f[n + i] = 1
    s1_lam = np.zeros(2, dtype=np.int64)
    s1_h = np.zeros((2, two), dtype=np.int64)
    n1 = _find_transvections(e, v, n, d, i, inv, s1_lam, s1_h, 0)
    u1 = u.copy()
    for idx in range(n1 - 1, -1, -1):
        u1 = _tv_apply((-s1_lam[idx]) % d, s1_h[idx], u1, d)
    same = True
    for j in range(two):
        if u1[j] != f[j]:
            same = False
            break
    n2 = 0
    if not same:
        if _sprod(f, u1, d) != 0:
            h = (u1 - f) % d
            lams[base] = inv[_sprod(f, h, d)]
            hs[base] = h
            n2 = 1
        else:
            w = (f + e) % d
            lams[base] = inv[_sprod(f, e, d)]
            hs[base] = e
            lams[base + 1] = inv[_sprod(w, u1, d)]
            hs[base + 1] = (u1 - w) % d
            n2 = 2
    for idx in range(n1):
        lams[base + n2 + idx] = s1_lam[idx]
        hs[base + n2 + idx] = s1_h[idx]
    return n2 + n1


@njit(**KERNEL_FLAGS)
def _sample_clifford(n, d, rng, inv):
    """Uniform label (M, g) on n qudits; same rng stream as the engine sampler."""
    two = 2 * n
    lams = np.zeros(4 * n, dtype=np.int64)
    hs = np.zeros((4 * n, two), dtype=np.int64)
    offs = np.zeros(n, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    pos = 0
    for i in range(n):
        m = 2 * (n - i)
        sub = rng.integers(0, d, size=m)
        while not sub.any():
            sub = rng.integers(0, d, size=m)
        v = np.zeros(two, dtype=np.int64)
        for j in range(n - i):
            v[i + j] = sub[j]
            v[n + i + j] = sub[n - i + j]
        z = np.zeros(two, dtype=np.int64)
        done = False
        for j in range(i, n):
            if v[j] != 0:
                z[n + j] = inv[v[j]]
                done = True
                break
        if not done:
            for j in range(i, n):
                if v[n + j] != 0:
                    z[j] = (d - inv[v[n + j]]) % d
                    break
        sub = rng.integers(0, d, size=m)
        t = np.zeros(two, dtype=np.int64)
        for j in range(n - i):
            t[i + j] = sub[j]
            t[n + i + j] = sub[n - i + j]
        c = (1 - _sprod(v, t, d)) % d
        u = (t + c * z) % d
        offs[i] = pos
        counts[i] = _pair_map(v, u, i, n, d, inv, lams, hs, pos)
        pos += counts[i]
    mat = np.zeros((two, two), dtype=np.int64)
    for j in range(two):
        mat[j, j] = 1
    for i in range(n - 1, -1, -1):
        for k in range(two):
            col = mat[:, k].copy()
            for idx in range(counts[i]):
                col = _tv_apply(lams[offs[i] + idx], hs[offs[i] + idx], col, d)
            mat[:, k] = col
    g = rng.integers(0, d, size=two)
    return mat, g


@njit(**KERNEL_FLAGS)
def sample_labels(n, d, count, rng):
    """Stacked sampled labels, for equality checks against the engine sampler."""
    inv = _inv_table(d)
    mats = np.empty((count, 2 * n, 2 * n), dtype=np.int64)
    gs = np.empty((count, 2 * n), dtype=np.int64)
    for s in range(count):
        mat, g = _sample_clifford(n, d, rng, inv)
        mats[s] = mat
        gs[s] = g
    return mats, gs


@njit(**KERNEL_FLAGS)
def _block_echelon(mat, d, base, c0, c1, r0, r1, reverse, inv):
    """Row-echelon the (base + c0 .. base + c1) block inside rows r0..r1."""
    pivot = r0
    if reverse:
        start, stop, step = c1 - 1, c0 - 1, -1
    else:
        start, stop, step = c0, c1, 1
    width = mat.shape[1]
    for c in range(start, stop, step):
        if pivot == r1:
            break
        col = base + c
        p = -1
        for r in range(pivot, r1):
            if mat[r, col] != 0:
                p = r
                break
        if p < 0:
            continue
        if p != pivot:
            for j in range(width):
                tmp = mat[pivot, j]
                mat[pivot, j] = mat[p, j]
                mat[p, j] = tmp
        f = inv[mat[pivot, col]]
        if f != 1:
            for j in range(width):
                mat[pivot, j] = mat[pivot, j] * f % d
        for q in range(pivot + 1, r1):
            fq = mat[q, col]
            if fq != 0:
                for j in range(width):
                    mat[q, j] = (mat[q, j] - fq * mat[pivot, j]) % d
        pivot += 1
    return pivot


@njit(**KERNEL_FLAGS)
def _block_cut(mat, base, c0, c1, r0, r1):
    for r in range(r0, r1):
        allz = True
        for j in range(base + c0, base + c1):
            if mat[r, j] != 0:
                allz = False
                break
        if allz:
            return r
    return r1


@njit(**KERNEL_FLAGS)
def _magic_trace(G, kg, r, n, N, d, tables, phases):
    """tr[Pi_gamma (|T+><T+|)^t] from the first kg rows of the cascade output."""
    t = N - n
    if kg == 0:
        return 1.0
    total = 1
    for _ in range(kg):
        total *= d
    acc = 0.0 + 0.0j
    c = np.zeros(kg, dtype=np.int64)
    for flat in range(total):
        rem = flat
        for i in range(kg):
            c[i] = rem % d
            rem //= d
        ph = 0
        for i in range(kg):
            ph += c[i] * r[i]
        val = phases[ph % d]
        for j in range(t):
            sz = 0
            sx = 0
            for i in range(kg):
                sz += c[i] * G[i, n + j]
                sx += c[i] * G[i, N + n + j]
            val = val * tables[j, sz % d, sx % d]
        acc += val
    return acc.real / total


@njit(**KERNEL_FLAGS)
def _stage12(W, n, N, d, inv):
    """Shared outcome-independent echelon: x-reduce the data block, cut, then
    right-echelon the z data block below the cut. Returns the cut row."""
    _block_echelon(W, d, N, 0, n, 0, N, False, inv)
    c1 = _block_cut(W, N, 0, n, 0, N)
    _block_echelon(W, d, 0, 0, n, c1, N, True, inv)
    return c1


@njit(**KERNEL_FLAGS)
def _prefix_cut(W, c1, m, n, N):
    for r in range(c1, N):
        allz = True
        for j in range(m, n):
            if W[r, j] != 0:
                allz = False
                break
        if allz:
            return r
    return N


@njit(**KERNEL_FLAGS)
def _ancilla_cascade(G, xi, n, N, d, inv):
    _block_echelon(G, d, N, n, N, 0, xi, True, inv)
    c3 = _block_cut(G, N, n, N, 0, xi)
    _block_echelon(G, d, 0, n, N, c3, xi, True, inv)
    return _block_cut(G, 0, n, N, c3, xi)


@njit(**KERNEL_FLAGS)
def _prefix_prob(G, xi, c4, x, m, n, N, d, tables, phases, r):
    """p(x_1..x_m) from a finished cascade; negative traces pass through."""
    for i in range(xi):
        s = G[i, 2 * N]
        for j in range(m):
            s += G[i, j] * x[j]
        r[i] = s % d
    for i in range(c4, xi):
        if r[i] != 0:
            return 0.0
    return math.pow(d, xi - m) * _magic_trace(G, c4, r, n, N, d, tables, phases)


@njit(**KERNEL_FLAGS)
def _sample_sequential(S, x, n, N, d, inv, tables, phases, rng):
    """Draw a full data outcome into x, chain-rule site by site."""
    W = S.copy()
    c1 = _stage12(W, n, N, d, inv)
    probs = np.zeros(d)
    r = np.zeros(N, dtype=np.int64)
    for m in range(1, n + 1):
        c2 = _prefix_cut(W, c1, m, n, N)
        xi = N - c2
        G = W[c2:N].copy()
        c4 = _ancilla_cascade(G, xi, n, N, d, inv)
        tot = 0.0
        for y in range(d):
            x[m - 1] = y
            p = _prefix_prob(G, xi, c4, x, m, n, N, d, tables, phases, r)
            probs[y] = p if p > 0.0 else 0.0
            tot += probs[y]
        if tot <= 0.0:
            raise RuntimeError("all outcome extensions carry zero weight")
        draw = rng.random() * tot
        y = d - 1
        acc = 0.0
        for cand in range(d):
            acc += probs[cand]
            if draw < acc:
                y = cand
                break
        x[m - 1] = y


@njit(**KERNEL_FLAGS)
def _full_prob(S, x, n, N, d, inv, tables, phases):
    """p(x) of the full data outcome, one fresh cascade from the raw rows."""
    W = S.copy()
    c1 = _stage12(W, n, N, d, inv)
    c2 = _prefix_cut(W, c1, n, n, N)
    xi = N - c2
    G = W[c2:N].copy()
    c4 = _ancilla_cascade(G, xi, n, N, d, inv)
    r = np.zeros(N, dtype=np.int64)
    return _prefix_prob(G, xi, c4, x, n, n, N, d, tables, phases, r)


@njit(**KERNEL_FLAGS)
def _compose_state(M0, g0, P, pg, post_mat, post_g, n, N, d, A, B, S):
    """Stabilizer rows of (post o embedded-Clifford o prep) |0>.

    P holds the first N columns of the preparation matrix, pg its Weyl part;
    the sampled data-qudit label (M0, g0) is embedded on sites 0..n-1.
    """
    two = 2 * N
    for rr in range(two):
        for c in range(N):
            A[rr, c] = P[rr, c]
    g1 = np.zeros(two, dtype=np.int64)
    for rr in range(two):
        g1[rr] = pg[rr]
    for r in range(2 * n):
        rr = r if r < n else N + (r - n)
        sg = 0
        for t in range(2 * n):
            tt = t if t < n else N + (t - n)
            sg += M0[r, t] * pg[tt]
        g1[rr] = (g0[r] + sg) % d
        for c in range(N):
            s = 0
            for t in range(2 * n):
                tt = t if t < n else N + (t - n)
                s += M0[r, t] * P[tt, c]
            A[rr, c] = s % d
    g2 = np.zeros(two, dtype=np.int64)
    for r in range(two):
        sg = 0
        for t in range(two):
            sg += post_mat[r, t] * g1[t]
        g2[r] = (post_g[r] + sg) % d
        for c in range(N):
            s = 0
            for t in range(two):
                s += post_mat[r, t] * A[t, c]
            B[r, c] = s % d
    for i in range(N):
        for j in range(two):
            S[i, j] = B[j, i]
        s = 0
        for a in range(N):
            s += g2[a] * B[N + a, i] - g2[N + a] * B[a, i]
        S[i, two] = s % d


@njit(**KERNEL_FLAGS)
def fidelity_values(n, d, prep_mat, prep_g, post_mat, post_g, tables, phases,
                    depol, shots, rng):
    """Per-shot fidelity estimates (D+1) p(x) - 1 for one experiment run.

    Outcomes are drawn from the prepared state (a uniformly random basis state
    with probability depol); p(x) is always evaluated on the target state.
    """
    N = prep_mat.shape[0] // 2
    inv = _inv_table(d)
    Dp1 = 1.0
    for _ in range(n):
        Dp1 *= d
    Dp1 += 1.0
    PT = np.empty((2 * N, N), dtype=np.int64)
    PB = np.zeros((2 * N, N), dtype=np.int64)
    for r in range(2 * N):
        for c in range(N):
            PT[r, c] = prep_mat[r, c]
    for i in range(N):
        PB[i, i] = 1
    gb = np.zeros(2 * N, dtype=np.int64)
    A = np.zeros((2 * N, N), dtype=np.int64)
    B = np.zeros((2 * N, N), dtype=np.int64)
    S = np.zeros((N, 2 * N + 1), dtype=np.int64)
    St = np.zeros((N, 2 * N + 1), dtype=np.int64)
    x = np.zeros(n, dtype=np.int64)
    vals = np.empty(shots)
    for s in range(shots):
        noisy = False
        if depol > 0.0:
            noisy = rng.random() < depol
        M0, g0 = _sample_clifford(n, d, rng, inv)
        if noisy:
            z = rng.integers(0, d, size=n)
            for j in range(2 * N):
                gb[j] = 0
            for j in range(n):
                gb[N + j] = z[j]
            _compose_state(M0, g0, PB, gb, post_mat, post_g, n, N, d, A, B, S)
        else:
            _compose_state(M0, g0, PT, prep_g, post_mat, post_g, n, N, d, A, B, S)
        _sample_sequential(S, x, n, N, d, inv, tables, phases, rng)
        if noisy:
            _compose_state(M0, g0, PT, prep_g, post_mat, post_g, n, N, d, A, B, St)
            q = _full_prob(St, x, n, N, d, inv, tables, phases)
        else:
            q = _full_prob(S, x, n, N, d, inv, tables, phases)
        vals[s] = Dp1 * q - 1.0
    return vals
