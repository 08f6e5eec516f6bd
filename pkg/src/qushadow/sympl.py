"""Symplectic transvections, uniform sampling of Sp(2n,d) and Cl(n,d), Clifford labels.

A Clifford unitary is tracked projectively as a label (M, g): conjugation sends
W_u to chi([g, Mu]) W_{Mu} with M symplectic. Uniform sampling builds M one
hyperbolic pair at a time; the map sending (e_z_i, e_x_i) to a sampled image
pair is realized by at most four transvections, which is also how labels get
decomposed into named-gate words for the dense oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import fe_inv, validate_modulus
from .weyl import DimensionMismatch, as_vector, symplectic_product


class ZeroVector(ValueError):
    pass


class NotSymplectic(ValueError):
    pass


def omega_matrix(n: int) -> np.ndarray:
    """Gram matrix of the symplectic product in the global layout."""
    eye = np.eye(n, dtype=np.int64)
    zero = np.zeros((n, n), dtype=np.int64)
    return np.block([[zero, eye], [-eye, zero]])


def is_symplectic(mat: np.ndarray, d: int) -> bool:
    mat = np.asarray(mat, dtype=np.int64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2 != 0:
        return False
    omega = omega_matrix(mat.shape[0] // 2)
    return bool(np.array_equal(mat.T @ omega @ mat % d, omega % d))


@dataclass(frozen=True)
class Transvection:
    """x maps to x + lam [x,h] h; inverse is (-lam, h)."""

    lam: int
    h: np.ndarray

    def inverse(self, d: int) -> "Transvection":
        return Transvection((-self.lam) % d, self.h)


def transvection_apply(t: Transvection, x, d: int) -> np.ndarray:
    x = as_vector(x)
    h = as_vector(t.h)
    if x.size != h.size:
        raise DimensionMismatch(f"vector lengths differ: {x.size} vs {h.size}")
    return (x + t.lam * symplectic_product(x, h, d) * h) % d


def apply_transvections(ts, x, d: int) -> np.ndarray:
    """Apply a sequence of transvections left to right."""
    for t in ts:
        x = transvection_apply(t, x, d)
    return x


def invert_transvections(ts, d: int) -> list[Transvection]:
    return [t.inverse(d) for t in reversed(ts)]


def _coord_scan(x, y, d: int, lo: int) -> np.ndarray:
    """Deterministic w with [x,w] != 0 != [w,y], supported on coordinates >= lo per half."""
    x, y = as_vector(x), as_vector(y)
    n = x.size // 2
    allowed = [k for k in range(lo, n)] + [k for k in range(n + lo, 2 * n)]
    first_x = first_y = None
    for k in allowed:
        e = np.zeros(2 * n, dtype=np.int64)
        e[k] = 1
        px, py = symplectic_product(x, e, d), symplectic_product(y, e, d)
        if px != 0 and py != 0:
            return e
        if px != 0 and py == 0 and first_x is None:
            first_x = e
        if py != 0 and px == 0 and first_y is None:
            first_y = e
    return (first_x + first_y) % d


def find_transvections(x, y, d: int, lo: int = 0) -> list[Transvection]:
    """At most two transvections whose left-to-right composition maps x to y.

    All returned directions h are supported on sites >= lo, provided x and y are.
    """
    d = validate_modulus(d)
    x, y = as_vector(x) % d, as_vector(y) % d
    if not x.any() or not y.any():
        raise ZeroVector("transvection routing needs nonzero endpoints")
    if np.array_equal(x, y):
        return []
    s = symplectic_product(x, y, d)
    if s != 0:
        return [Transvection(fe_inv(s, d), (y - x) % d)]
    w = _coord_scan(x, y, d, lo)
    t1 = Transvection(fe_inv(symplectic_product(x, w, d), d), (w - x) % d)
    t2 = Transvection(fe_inv(symplectic_product(w, y, d), d), (y - w) % d)
    return [t1, t2]


def _basis_pair(n: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    e = np.zeros(2 * n, dtype=np.int64)
    f = np.zeros(2 * n, dtype=np.int64)
    e[i] = 1
    f[n + i] = 1
    return e, f


def pair_map(v, u, i: int, d: int) -> list[Transvection]:
    """Transvections sending the hyperbolic pair (e_z_i, e_x_i) to (v, u).

    Needs [v,u] = 1 and v, u supported on sites >= i; the returned directions
    stay on sites >= i, so earlier pairs are untouched.
    """
    v, u = as_vector(v) % d, as_vector(u) % d
    n = v.size // 2
    if symplectic_product(v, u, d) != 1:
        raise NotSymplectic("image pair must have symplectic product 1")
    e, f = _basis_pair(n, i)
    stage1 = find_transvections(e, v, d, lo=i)
    u1 = apply_transvections(invert_transvections(stage1, d), u, d)
    if np.array_equal(u1, f):
        stage2 = []
    elif symplectic_product(f, u1, d) != 0:
        stage2 = [Transvection(fe_inv(symplectic_product(f, u1 - f, d), d), (u1 - f) % d)]
    else:
        # Route through w = f + e, which pairs correctly with f, u1, and e.
        w = (f + e) % d
        t1 = Transvection(fe_inv(symplectic_product(f, e, d), d), e.copy())
        t2 = Transvection(fe_inv(symplectic_product(w, u1, d), d), (u1 - w) % d)
        stage2 = [t1, t2]
    return stage2 + stage1


def _partner(v, i: int, d: int) -> np.ndarray:
    """Canonical z with [v, z] = 1 for nonzero v supported on sites >= i."""
    v = as_vector(v)
    n = v.size // 2
    z = np.zeros(2 * n, dtype=np.int64)
    for j in range(i, n):
        if v[j] != 0:
            z[n + j] = fe_inv(v[j], d)
            return z
    for j in range(i, n):
        if v[n + j] != 0:
            z[j] = (-fe_inv(v[n + j], d)) % d
            return z
    raise ZeroVector("cannot build a partner for the zero vector")


def sample_image_pair(n: int, i: int, d: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Uniform (v, u) with [v,u] = 1, supported on sites >= i.

    v is uniform over nonzero vectors of the 2(n-i)-dimensional subspace; u is
    uniform over its fiber because t maps d-to-1 onto {u : [v,u] = 1}.
    """
    m = 2 * (n - i)
    v = np.zeros(2 * n, dtype=np.int64)
    while True:
        sub = rng.integers(0, d, size=m)
        if sub.any():
            break
    v[i:n] = sub[: n - i]
    v[n + i:] = sub[n - i:]
    z = _partner(v, i, d)
    t = np.zeros(2 * n, dtype=np.int64)
    sub = rng.integers(0, d, size=m)
    t[i:n] = sub[: n - i]
    t[n + i:] = sub[n - i:]
    c = (1 - symplectic_product(v, t, d)) % d
    u = (t + c * z) % d
    return v, u


def transvection_factorization(mat: np.ndarray, d: int) -> list[list[Transvection]]:
    """Per-pair transvection lists whose composition equals mat.

    Entry i holds the transvections R_i mapping (e_z_i, e_x_i) to the images
    that the residual matrix prescribes; as matrices mat = R_0 R_1 ... R_{n-1}.
    """
    mat = np.asarray(mat, dtype=np.int64) % d
    if not is_symplectic(mat, d):
        raise NotSymplectic("transvection factorization needs a symplectic matrix")
    n = mat.shape[0] // 2
    residual = mat.copy()
    stages = []
    for i in range(n):
        v, u = residual[:, i].copy(), residual[:, n + i].copy()
        ts = pair_map(v, u, i, d)
        stages.append(ts)
        inv = invert_transvections(ts, d)
        for k in range(2 * n):
            residual[:, k] = apply_transvections(inv, residual[:, k], d)
    return stages


@dataclass(frozen=True)
class CliffordLabel:
    """Projective label (M, g) of the Clifford unitary W_g mu(M)."""

    mat: np.ndarray
    g: np.ndarray
    d: int

    def __post_init__(self):
        validate_modulus(self.d)
        mat = np.asarray(self.mat, dtype=np.int64) % self.d
        g = as_vector(self.g) % self.d
        if mat.shape != (g.size, g.size):
            raise DimensionMismatch(f"matrix {mat.shape} does not match vector length {g.size}")
        if not is_symplectic(mat, self.d):
            raise NotSymplectic("label matrix must be symplectic")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "g", g)

    @property
    def n(self) -> int:
        return self.g.size // 2

    def conjugate(self, u) -> tuple[np.ndarray, int]:
        """Image label and phase shift: C W_u C^dagger = chi(shift) W_{Mu}."""
        u = as_vector(u) % self.d
        mu = self.mat @ u % self.d
        return mu, symplectic_product(self.g, mu, self.d)

    def compose(self, other: "CliffordLabel") -> "CliffordLabel":
        """Label of self applied after other."""
        if self.d != other.d or self.n != other.n:
            raise DimensionMismatch("labels live on different systems")
        mat = self.mat @ other.mat % self.d
        g = (self.g + self.mat @ other.g) % self.d
        return CliffordLabel(mat, g, self.d)

    def inverse(self) -> "CliffordLabel":
        inv = symplectic_inverse(self.mat, self.d)
        return CliffordLabel(inv, (-(inv @ self.g)) % self.d, self.d)


def symplectic_inverse(mat: np.ndarray, d: int) -> np.ndarray:
    """M^{-1} = Omega^{-1} M^T Omega, exact over F_d."""
    n = np.asarray(mat).shape[0] // 2
    omega = omega_matrix(n)
    return omega.T @ mat.T @ omega % d


def identity_label(n: int, d: int) -> CliffordLabel:
    return CliffordLabel(np.eye(2 * n, dtype=np.int64), np.zeros(2 * n, dtype=np.int64), d)


def weyl_label(u, d: int) -> CliffordLabel:
    u = as_vector(u)
    return CliffordLabel(np.eye(u.size, dtype=np.int64), u, d)


def sample_symplectic(n: int, d: int, rng) -> np.ndarray:
    """Uniform element of Sp(2n,d) via the pair-by-pair coset construction."""
    d = validate_modulus(d)
    mat = np.eye(2 * n, dtype=np.int64)
    stages = []
    for i in range(n):
        v, u = sample_image_pair(n, i, d, rng)
        stages.append(pair_map(v, u, i, d))
    for ts in reversed(stages):
        for k in range(2 * n):
            mat[:, k] = apply_transvections(ts, mat[:, k], d)
    return mat


def sample_clifford(n: int, d: int, rng) -> CliffordLabel:
    """Uniform Clifford label: uniform symplectic part, uniform Weyl part."""
    mat = sample_symplectic(n, d, rng)
    g = rng.integers(0, d, size=2 * n).astype(np.int64)
    return CliffordLabel(mat, g, d)
