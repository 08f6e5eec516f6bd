"""Dense linear algebra over the prime field F_d: echelon forms, solving, subspaces.

Matrices are int64 numpy arrays with entries reduced mod d; rows are vectors.
Everything here is exact integer arithmetic, no floating point.
"""

from __future__ import annotations

import numpy as np

from .field import fe_inv


class InconsistentSystem(ValueError):
    pass


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.int64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    return m


def row_reduce(a, d: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of a mod d and its pivot column list."""
    m = _as_matrix(a) % d
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = m[r] * fe_inv(int(m[r, c]), d) % d
        other = np.nonzero(m[:, c])[0]
        for q in other:
            if q != r:
                m[q] = (m[q] - m[q, c] * m[r]) % d
        pivots.append(c)
        r += 1
    return m, pivots


def rank_mod(a, d: int) -> int:
    return len(row_reduce(a, d)[1])


def row_basis(a, d: int) -> np.ndarray:
    """Canonical basis (nonzero reduced-echelon rows) of the row space of a."""
    m, pivots = row_reduce(a, d)
    return m[: len(pivots)]


def in_rowspace(v, a, d: int) -> bool:
    m, pivots = row_reduce(a, d)
    v = np.asarray(v, dtype=np.int64) % d
    for r, c in enumerate(pivots):
        v = (v - v[c] * m[r]) % d
    return not v.any()


def solve_mod(a, b, d: int) -> np.ndarray:
    """Canonical solution of a x = b mod d, free variables set to zero.

    Raises InconsistentSystem when no solution exists.
    """
    a = _as_matrix(a)
    b = np.asarray(b, dtype=np.int64).reshape(-1)
    if a.shape[0] != b.size:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.size} right-hand entries")
    aug, pivots = row_reduce(np.hstack([a, b.reshape(-1, 1)]), d)
    if pivots and pivots[-1] == a.shape[1]:
        raise InconsistentSystem("right-hand side outside the column space")
    x = np.zeros(a.shape[1], dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = aug[r, -1]
    return x


def kernel_basis(a, d: int) -> np.ndarray:
    """Basis of the right null space of a mod d, one row per free column."""
    a = _as_matrix(a)
    m, pivots = row_reduce(a, d)
    free = [c for c in range(a.shape[1]) if c not in pivots]
    out = np.zeros((len(free), a.shape[1]), dtype=np.int64)
    for i, c in enumerate(free):
        out[i, c] = 1
        for r, p in enumerate(pivots):
            out[i, p] = (-m[r, c]) % d
    return out


def intersect_rowspaces(a, b, d: int) -> np.ndarray:
    """Basis of rowspace(a) & rowspace(b) via the Zassenhaus block trick."""
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"ambient dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    w = a.shape[1]
    block = np.zeros((a.shape[0] + b.shape[0], 2 * w), dtype=np.int64)
    block[: a.shape[0], :w] = a
    block[: a.shape[0], w:] = a
    block[a.shape[0]:, :w] = b
    m, pivots = row_reduce(block, d)
    keep = [r for r, c in enumerate(pivots) if c >= w]
    return m[keep, w:]
