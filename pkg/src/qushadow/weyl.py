"""Phase-space picture of Weyl operators on n qudits of odd prime dimension d.

A symplectic vector u in F_d^{2n} is stored as a length-2n int64 numpy array in
the global layout (u^z_1..u^z_n, u^x_1..u^x_n). The Weyl operator it labels is

    W_u = chi(-u^z . u^x / 2) Z^{u^z} X^{u^x},  chi(r) = exp(2 pi i r / d),

where the half-integer 1/2 means the field inverse (d+1)/2. This normalization
makes W_u unitary with W_u^dagger = W_{-u} and keeps all composition phases in
the exponent ring Z_d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import half, validate_modulus


class DimensionMismatch(ValueError):
    pass


def as_vector(u) -> np.ndarray:
    v = np.asarray(u, dtype=np.int64)
    if v.ndim != 1 or v.size % 2 != 0:
        raise DimensionMismatch(f"symplectic vector must have even length, got shape {v.shape}")
    return v


def vector(z, x, d: int) -> np.ndarray:
    """Assemble (z | x) and reduce mod d."""
    z = np.atleast_1d(np.asarray(z, dtype=np.int64))
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    if z.shape != x.shape:
        raise DimensionMismatch(f"z and x parts differ in length: {z.shape} vs {x.shape}")
    return np.concatenate([z, x]) % d


def num_sites(u) -> int:
    u = as_vector(u)
    return u.size // 2


def zpart(u) -> np.ndarray:
    u = as_vector(u)
    return u[: u.size // 2]


def xpart(u) -> np.ndarray:
    u = as_vector(u)
    return u[u.size // 2:]


def symplectic_product(u, v, d: int) -> int:
    """[u,v] = u^z . v^x - u^x . v^z mod d."""
    u, v = as_vector(u), as_vector(v)
    if u.size != v.size:
        raise DimensionMismatch(f"vector lengths differ: {u.size} vs {v.size}")
    n = u.size // 2
    return int((u[:n] @ v[n:] - u[n:] @ v[:n]) % d)


def local_perm(n: int) -> np.ndarray:
    """Index permutation taking global layout (z1..zn, x1..xn) to (z1,x1,z2,x2,...)."""
    return np.array([i // 2 + (i % 2) * n for i in range(2 * n)], dtype=np.int64)


def to_local(u) -> np.ndarray:
    u = as_vector(u)
    return u[local_perm(u.size // 2)]


def from_local(u) -> np.ndarray:
    u = as_vector(u)
    out = np.empty_like(u)
    out[local_perm(u.size // 2)] = u
    return out


def weight(u) -> int:
    """Number of sites on which the label acts nontrivially."""
    u = as_vector(u)
    n = u.size // 2
    return int(np.count_nonzero((u[:n] != 0) | (u[n:] != 0)))


@dataclass(frozen=True)
class WeylOperator:
    """A phased Weyl operator omega_d^phase W_u."""

    u: np.ndarray
    phase: int
    d: int

    def __post_init__(self):
        validate_modulus(self.d)
        object.__setattr__(self, "u", as_vector(self.u) % self.d)
        object.__setattr__(self, "phase", int(self.phase) % self.d)

    @property
    def n(self) -> int:
        return self.u.size // 2

    def adjoint(self) -> "WeylOperator":
        return WeylOperator((-self.u) % self.d, -self.phase, self.d)

    def __eq__(self, other) -> bool:
        return (self.d == other.d and self.phase == other.phase
                and np.array_equal(self.u, other.u))


def weyl_identity(n: int, d: int) -> WeylOperator:
    return WeylOperator(np.zeros(2 * n, dtype=np.int64), 0, d)


def weyl_compose(w1: WeylOperator, w2: WeylOperator) -> WeylOperator:
    """Product w1 w2; the composition phase is half the symplectic product."""
    if w1.d != w2.d or w1.u.size != w2.u.size:
        raise DimensionMismatch("operands live on different systems")
    d = w1.d
    phase = (w1.phase + w2.phase + half(d) * symplectic_product(w1.u, w2.u, d)) % d
    return WeylOperator((w1.u + w2.u) % d, phase, d)


@dataclass(frozen=True)
class WeightProfile:
    """Per-site support and dependence relations of a label pair."""

    wu: int
    wv: int
    join: int
    meet: int
    proportional: bool
    loc_commute: bool


def weight_profile(u, v, d: int) -> WeightProfile:
    """Site-wise weights, join/meet of supports, and the two dependence relations.

    proportional: every site of u is a multiple of the same site of v.
    loc_commute: every site pair is linearly dependent, which is exactly
    site-wise commutativity of the two Weyl operators.
    """
    u, v = as_vector(u) % d, as_vector(v) % d
    if u.size != v.size:
        raise DimensionMismatch(f"vector lengths differ: {u.size} vs {v.size}")
    n = u.size // 2
    uz, ux, vz, vx = u[:n], u[n:], v[:n], v[n:]
    su = (uz != 0) | (ux != 0)
    sv = (vz != 0) | (vx != 0)
    dep = (uz * vx - ux * vz) % d == 0
    prop = bool(np.all(dep & (sv | ~su)))
    return WeightProfile(
        wu=int(su.sum()),
        wv=int(sv.sum()),
        join=int((su | sv).sum()),
        meet=int((su & sv).sum()),
        proportional=prop,
        loc_commute=bool(np.all(dep)),
    )
