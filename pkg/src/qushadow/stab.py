"""Stabilizer-state engine over odd prime qudits.

Three representations of an n-qudit stabilizer state:

  * GeneratingMatrix: k rows (u^z | u^x | r), one per generator chi(r) W_u of
    the stabilizer group, so chi(r) W_u |psi> = |psi>.
  * Tableau: a maximal (k = n) generating matrix plus destabilizer rows v_j
    with [u_i, v_j] = delta_ij, enabling fast phase bookkeeping.
  * LagrangianState: the Lagrangian span L of the stabilizer vectors plus a
    characteristic vector m with [m, u] = r_u for every generator.

Clifford updates act row-wise; measurement and overlaps reduce to linear
algebra over F_d on the Lagrangian data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circuit import Gate, gate_clifford_label
from .field import fe_inv, validate_modulus
from .linalg import intersect_rowspaces, rank_mod, solve_mod
from .sympl import CliffordLabel, apply_transvections, find_transvections, invert_transvections
from .weyl import DimensionMismatch, symplectic_product, vector


class NotCommuting(ValueError):
    pass


class NotIndependent(ValueError):
    pass


class NotSymplecticPair(ValueError):
    pass


class BadWindow(IndexError):
    pass


def _pairwise_products(vecs: np.ndarray, d: int) -> np.ndarray:
    n = vecs.shape[1] // 2
    vz, vx = vecs[:, :n], vecs[:, n:]
    return (vz @ vx.T - vx @ vz.T) % d


@dataclass(frozen=True)
class GeneratingMatrix:
    """k commuting, independent stabilizer generators in the (G^z | G^x | r) layout."""

    mat: np.ndarray
    d: int

    def __post_init__(self):
        validate_modulus(self.d)
        mat = np.asarray(self.mat, dtype=np.int64) % self.d
        if mat.ndim != 2 or mat.shape[1] % 2 == 0:
            raise DimensionMismatch(f"expected (k, 2n+1) layout, got shape {mat.shape}")
        object.__setattr__(self, "mat", mat)
        if _pairwise_products(self.vectors, self.d).any():
            raise NotCommuting("generator rows must pairwise commute")
        if rank_mod(self.vectors, self.d) < self.k:
            raise NotIndependent("generator rows must be linearly independent")

    @property
    def n(self) -> int:
        return (self.mat.shape[1] - 1) // 2

    @property
    def k(self) -> int:
        return self.mat.shape[0]

    @property
    def vectors(self) -> np.ndarray:
        return self.mat[:, :-1]

    @property
    def gz(self) -> np.ndarray:
        return self.mat[:, : self.n]

    @property
    def gx(self) -> np.ndarray:
        return self.mat[:, self.n: 2 * self.n]

    @property
    def r(self) -> np.ndarray:
        return self.mat[:, -1]


def generating_matrix(vectors, phases, d: int) -> GeneratingMatrix:
    """Assemble a GeneratingMatrix from stabilizer vectors and phase exponents."""
    vecs = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
    r = np.asarray(phases, dtype=np.int64).reshape(-1, 1)
    if vecs.shape[0] != r.shape[0]:
        raise DimensionMismatch(f"{vecs.shape[0]} vectors but {r.shape[0]} phases")
    return GeneratingMatrix(np.hstack([vecs, r]), d)


def zero_state_generating(n: int, d: int) -> GeneratingMatrix:
    """Generating matrix of |0...0>: Z on every site, all phases zero."""
    mat = np.zeros((n, 2 * n + 1), dtype=np.int64)
    mat[:, :n] = np.eye(n, dtype=np.int64)
    return GeneratingMatrix(mat, d)


@dataclass(frozen=True)
class Tableau:
    """Maximal stabilizer rows plus destabilizer partners, [u_i, v_j] = delta_ij."""

    stab: GeneratingMatrix
    destab: GeneratingMatrix

    def __post_init__(self):
        n, d = self.stab.n, self.stab.d
        if self.destab.n != n or self.destab.d != d:
            raise DimensionMismatch("stabilizer and destabilizer halves disagree")
        if self.stab.k != n or self.destab.k != n:
            raise DimensionMismatch(f"tableau needs n={n} rows in each half")
        uz, ux = self.stab.gz, self.stab.gx
        vz, vx = self.destab.gz, self.destab.gx
        cross = (uz @ vx.T - ux @ vz.T) % d
        if not np.array_equal(cross, np.eye(n, dtype=np.int64)):
            raise NotSymplecticPair("[u_i, v_j] = delta_ij fails")

    @property
    def n(self) -> int:
        return self.stab.n

    @property
    def d(self) -> int:
        return self.stab.d


def canonical_tableau(n: int, d: int) -> Tableau:
    """Tableau of |0...0>: stabilizers Z_i, destabilizers X_i."""
    destab = np.zeros((n, 2 * n + 1), dtype=np.int64)
    destab[:, n: 2 * n] = np.eye(n, dtype=np.int64)
    return Tableau(zero_state_generating(n, d), GeneratingMatrix(destab, d))


@dataclass(frozen=True)
class LagrangianState:
    """A stabilizer state as (Lagrangian basis, characteristic vector m)."""

    basis: np.ndarray
    m: np.ndarray
    d: int

    def __post_init__(self):
        validate_modulus(self.d)
        basis = np.atleast_2d(np.asarray(self.basis, dtype=np.int64)) % self.d
        m = np.asarray(self.m, dtype=np.int64) % self.d
        n = basis.shape[1] // 2
        if basis.shape != (n, 2 * n) or m.shape != (2 * n,):
            raise DimensionMismatch(f"need n basis rows of length 2n, got {basis.shape}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "m", m)
        if _pairwise_products(basis, self.d).any():
            raise NotCommuting("basis must span a Lagrangian subspace")
        if rank_mod(basis, self.d) < n:
            raise NotIndependent("basis rows must be linearly independent")

    @property
    def n(self) -> int:
        return self.basis.shape[1] // 2


def basis_lagrangian(x, d: int) -> LagrangianState:
    """Computational-basis state |x> as a LagrangianState: L0 with m = (0; x)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.int64)) % d
    n = x.size
    basis = np.zeros((n, 2 * n), dtype=np.int64)
    basis[:, :n] = np.eye(n, dtype=np.int64)
    return LagrangianState(basis, vector(np.zeros(n, dtype=np.int64), x, d), d)


def _updated_rows(mat: np.ndarray, c: CliffordLabel) -> np.ndarray:
    n, d = c.n, c.d
    out = mat.copy()
    new_vecs = out[:, :-1] @ c.mat.T % d
    shift = (new_vecs[:, n:] @ c.g[:n] - new_vecs[:, :n] @ c.g[n:]) % d
    out[:, :-1] = new_vecs
    out[:, -1] = (out[:, -1] + shift) % d
    return out


def apply_clifford(state, c: CliffordLabel):
    """Conjugate every generator row: u -> M u, r -> r + [g, M u]."""
    if isinstance(state, Tableau):
        if state.n != c.n or state.d != c.d:
            raise DimensionMismatch(f"label acts on {c.n} qudits, state has {state.n}")
        return Tableau(apply_clifford(state.stab, c), apply_clifford(state.destab, c))
    if not isinstance(state, GeneratingMatrix):
        raise TypeError(f"cannot apply a Clifford label to {type(state).__name__}")
    if state.n != c.n or state.d != c.d:
        raise DimensionMismatch(f"label acts on {c.n} qudits, state has {state.n}")
    return GeneratingMatrix(_updated_rows(state.mat, c), state.d)


def apply_named_gate(state, gate: Gate):
    """Apply one elementary Clifford gate via its (M, g) label."""
    return apply_clifford(state, gate_clifford_label(gate, state.n, state.d))


def build_tableau(vectors, phases, d: int) -> Tableau:
    """Tableau of the state stabilized by {chi(p_i) W_{s_i}} from scratch.

    Finds a symplectic matrix mapping the Lagrangian of |0...0> onto
    span(s_1..s_n) by peeling one site per level with transvections, then
    solves an n x n linear system for the stabilizer phase exponents.
    Destabilizer phases are fixed to zero by convention.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=np.int64)) % d
    n = vecs.shape[1] // 2
    if vecs.shape != (n, 2 * n):
        raise DimensionMismatch(f"need n stabilizer vectors of length 2n, got {vecs.shape}")
    p = np.asarray(phases, dtype=np.int64).reshape(-1) % d
    if p.size != n:
        raise DimensionMismatch(f"{n} vectors but {p.size} phases")
    if _pairwise_products(vecs, d).any():
        raise NotCommuting("stabilizer vectors must pairwise commute")
    if rank_mod(vecs, d) < n:
        raise NotIndependent("stabilizer vectors must be independent (no phased identity)")

    # Peel one site per level: map e_z(1) onto the current leading vector, pull
    # the rest back, and drop the leading site. Commutation with the leading
    # vector forces its x entry to zero; clearing the z entry stays in the span.
    cur = [v.copy() for v in vecs]
    stages = []
    for i in range(n):
        width = cur[i].size
        e1 = np.zeros(width, dtype=np.int64)
        e1[0] = 1
        ts = find_transvections(e1, cur[i], d)
        stages.append(ts)
        inv = invert_transvections(ts, d)
        for j in range(i + 1, n):
            w = apply_transvections(inv, cur[j], d)
            cur[j] = np.delete(w, [0, width // 2])

    mat = np.eye(2, dtype=np.int64)
    for c in range(2):
        mat[:, c] = apply_transvections(stages[n - 1], mat[:, c], d)
    for i in range(n - 2, -1, -1):
        m_cur = mat.shape[0] // 2 + 1
        big = np.zeros((2 * m_cur, 2 * m_cur), dtype=np.int64)
        big[0, 0] = 1
        big[m_cur, m_cur] = 1
        emb = np.r_[np.arange(1, m_cur), np.arange(m_cur + 1, 2 * m_cur)]
        big[np.ix_(emb, emb)] = mat
        for c in range(2 * m_cur):
            big[:, c] = apply_transvections(stages[i], big[:, c], d)
        mat = big

    u = mat[:, :n].T % d
    v = mat[:, n:].T % d
    coeffs = np.array(
        [[symplectic_product(vecs[i], v[j], d) for j in range(n)] for i in range(n)],
        dtype=np.int64,
    )
    r = solve_mod(coeffs, p, d)
    return Tableau(generating_matrix(u, r, d), generating_matrix(v, np.zeros(n, dtype=np.int64), d))


def tableau_from_generating(g: GeneratingMatrix) -> Tableau:
    if g.k != g.n:
        raise DimensionMismatch(f"need a maximal set of {g.n} generators, got {g.k}")
    return build_tableau(g.vectors, g.r, g.d)


def characteristic_vector(t: Tableau) -> np.ndarray:
    """m = -sum_i r^u_i v_i, the unique-mod-L solution of [m, u_i] = r^u_i."""
    return (-t.stab.r) @ t.destab.vectors % t.d


def lagrangian_from_tableau(t: Tableau) -> LagrangianState:
    return LagrangianState(t.stab.vectors, characteristic_vector(t), t.d)


def overlap2(a: LagrangianState, b: LagrangianState) -> Fraction:
    """Squared overlap |<a|b>|^2 as an exact rational.

    Equals d^(dim(L1 & L2) - n) when m1 - m2 is symplectically orthogonal to
    the intersection, and 0 otherwise.
    """
    if a.n != b.n or a.d != b.d:
        raise DimensionMismatch("states live on different systems")
    d = a.d
    meet = intersect_rowspaces(a.basis, b.basis, d)
    delta = (a.m - b.m) % d
    for w in meet:
        if symplectic_product(delta, w, d) != 0:
            return Fraction(0)
    return Fraction(1, d ** (a.n - meet.shape[0]))


def outcome_probability(state: LagrangianState, x) -> Fraction:
    """Born probability of computational-basis outcome x, exactly."""
    return overlap2(state, basis_lagrangian(x, state.d))


def measure_all(state: LagrangianState, rng) -> np.ndarray:
    """Sample a full computational-basis outcome from the exact Born rule.

    Builds a basis of L0 & L (Zassenhaus), completes it to a basis of L0 by a
    deterministic scan over the Z unit vectors, then solves [x~, w_i] = [m, w_i]
    with fresh uniform right-hand entries on the completion rows. The x half of
    the canonical solution is the outcome.
    """
    n, d = state.n, state.d
    zero_basis = np.zeros((n, 2 * n), dtype=np.int64)
    zero_basis[:, :n] = np.eye(n, dtype=np.int64)
    meet = intersect_rowspaces(zero_basis, state.basis, d)
    rows = [w for w in meet]
    rhs = [symplectic_product(state.m, w, d) for w in meet]
    basis_so_far = list(meet)
    for i in range(n):
        if len(basis_so_far) == n:
            break
        cand = zero_basis[i]
        if rank_mod(np.vstack(basis_so_far + [cand]), d) > len(basis_so_far):
            basis_so_far.append(cand)
            rows.append(cand)
            rhs.append(int(rng.integers(0, d)))
    coeffs = np.array([np.concatenate([w[n:], -w[:n] % d]) for w in rows], dtype=np.int64)
    xt = solve_mod(coeffs, np.asarray(rhs, dtype=np.int64), d)
    return xt[n:]


# Windowed row operations shared with the gadget machinery. All act on the
# combined (k, 2n+1) layout; row operations touch full rows, pivot search is
# confined to the designated z or x block and the given window.

def _window(bounds, limit: int, what: str) -> tuple[int, int]:
    if bounds is None:
        return 0, limit
    lo, hi = int(bounds[0]), int(bounds[1])
    if not (0 <= lo <= hi <= limit):
        raise BadWindow(f"{what} window {bounds} outside [0, {limit}]")
    return lo, hi


def block_echelon(mat: np.ndarray, d: int, block: str, rows=None, cols=None,
                  reverse: bool = False) -> int:
    """Row-echelon the designated block in place; returns the cut row index.

    block selects the z or x half, cols a qudit window inside it, rows the rows
    allowed to move. reverse=True builds right echelon form (pivots scanned
    from the last window column backwards). The returned index is the first
    window row whose designated block is entirely zero (rows above it all
    carry a pivot), or the window end when none is.
    """
    nq = (mat.shape[1] - 1) // 2
    r0, r1 = _window(rows, mat.shape[0], "row")
    c0, c1 = _window(cols, nq, "column")
    base = 0 if block == "z" else nq
    order = range(c1 - 1, c0 - 1, -1) if reverse else range(c0, c1)
    pivot = r0
    for c in order:
        if pivot == r1:
            break
        col = base + c
        hits = np.nonzero(mat[pivot:r1, col])[0]
        if hits.size == 0:
            continue
        p = pivot + int(hits[0])
        if p != pivot:
            mat[[pivot, p]] = mat[[p, pivot]]
        mat[pivot] = mat[pivot] * fe_inv(int(mat[pivot, col]), d) % d
        for q in range(pivot + 1, r1):
            if mat[q, col]:
                mat[q] = (mat[q] - mat[q, col] * mat[pivot]) % d
        pivot += 1
    return pivot


def block_cut(mat: np.ndarray, block: str, rows=None, cols=None) -> int:
    """Smallest window row whose designated block is all zero, else window end."""
    nq = (mat.shape[1] - 1) // 2
    r0, r1 = _window(rows, mat.shape[0], "row")
    c0, c1 = _window(cols, nq, "column")
    base = 0 if block == "z" else nq
    for r in range(r0, r1):
        if not mat[r, base + c0: base + c1].any():
            return r
    return r1


_MODES = {
    "echelon-z": ("z", False),
    "echelon-x": ("x", False),
    "r-echelon-z": ("z", True),
    "r-echelon-x": ("x", True),
}


def normalize_rows(g: GeneratingMatrix, mode: str, rows=None, cols=None):
    """Group-preserving row reduction of the designated block; returns (g', cut)."""
    block, reverse = _MODES[mode]
    mat = g.mat.copy()
    block_echelon(mat, g.d, block, rows=rows, cols=cols, reverse=reverse)
    cut = block_cut(mat, block, rows=rows, cols=cols)
    return GeneratingMatrix(mat, g.d), cut
