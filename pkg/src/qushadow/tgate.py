"""Diagonal magic (T) gates: cubic data, magic states, and Weyl expectation tables.

A T gate is diag(omega_tilde^f(b)) with omega_tilde = omega_d for d >= 5 and
omega_9 for d = 3. For d >= 5, f(b) = c3 b^3 + c2 b^2 + c1 b over F_d with
c3 != 0; for d = 3, f(b) = c3 b^3 + 3 c2 b^2 lands in Z_9 with c3 in Z_9 not
divisible by 3 and c2 in F_3. The constant term is a global phase and dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import (CubicCharacterTable, PRIMITIVE_ROOTS, WrongResidueClass,
                    cubic_character, validate_modulus)


class UnsupportedSpec(ValueError):
    pass


@dataclass(frozen=True)
class TGateSpec:
    d: int
    c3: int
    c2: int = 0
    c1: int = 0
    dagger: bool = False

    def __post_init__(self):
        validate_modulus(self.d)
        if self.d == 3:
            if self.c3 % 3 == 0 or not 0 <= self.c3 < 9:
                raise UnsupportedSpec("d=3 needs c3 in Z_9 with c3 != 0 mod 3")
            if self.c2 % 3 != self.c2 or self.c1 != 0:
                raise UnsupportedSpec("d=3 magic data is (c3, c2) with c2 in F_3")
        else:
            if self.c3 % self.d == 0:
                raise UnsupportedSpec("cubic coefficient must be nonzero")
            for c in (self.c3, self.c2, self.c1):
                if not 0 <= c < self.d:
                    raise UnsupportedSpec(f"coefficient {c} out of range for F_{self.d}")

    @property
    def phase_modulus(self) -> int:
        return 9 if self.d == 3 else self.d


def canonical_tspec(d: int, dagger: bool = False) -> TGateSpec:
    """The gate diag(omega_tilde^{b^3})."""
    return TGateSpec(d=d, c3=1, dagger=dagger)


def f_exponents(spec: TGateSpec) -> np.ndarray:
    """f(b) for b = 0..d-1, reduced mod the phase modulus; dagger negates."""
    b = np.arange(spec.d, dtype=np.int64)
    if spec.d == 3:
        f = spec.c3 * b**3 + 3 * spec.c2 * b**2
    else:
        f = spec.c3 * b**3 + spec.c2 * b**2 + spec.c1 * b
    if spec.dagger:
        f = -f
    return f % spec.phase_modulus


def t_diagonal(spec: TGateSpec) -> np.ndarray:
    """Complex diagonal of the gate."""
    root = np.exp(2j * np.pi / spec.phase_modulus)
    return root ** f_exponents(spec)


def magic_state(spec: TGateSpec) -> np.ndarray:
    """Postselection state of the gate's reversed gadget: T^dag F|0> as amplitudes."""
    return np.conj(t_diagonal(spec)) / np.sqrt(spec.d)


def weyl_expectations(spec: TGateSpec) -> np.ndarray:
    """Table m[p, q] = <T^dag| W(p,q) |T^dag> for the gate's magic state.

    Uses W(p,q)|c> = chi(pc + 2^{-1}pq)|c+q>.
    """
    d = spec.d
    psi = magic_state(spec)
    hf = (d + 1) // 2
    cs = np.arange(d)
    out = np.zeros((d, d), dtype=complex)
    for p in range(d):
        for q in range(d):
            chi = np.exp(2j * np.pi / d * ((p * cs + hf * p * q) % d))
            out[p, q] = np.sum(np.conj(psi[(cs + q) % d]) * chi * psi[cs])
    return out


def cubic_class(spec: TGateSpec, table: CubicCharacterTable | None = None) -> int:
    """Cubic-character class of the gate, defined for d = 1 mod 3."""
    if spec.d % 3 != 1:
        raise WrongResidueClass(f"cubic classes need d = 1 mod 3, got d = {spec.d}")
    if table is None:
        table = CubicCharacterTable.build(spec.d)
    return cubic_character(spec.c3 % spec.d, table)


def tspec_from_class(d: int, j: int, dagger: bool = False) -> TGateSpec:
    """A representative gate with cubic class j (c3 = nu^j)."""
    validate_modulus(d)
    if d % 3 != 1:
        raise WrongResidueClass(f"cubic classes need d = 1 mod 3, got d = {d}")
    nu = PRIMITIVE_ROOTS[d] if d in PRIMITIVE_ROOTS else None
    if nu is None:
        from .field import primitive_element
        nu = primitive_element(d)
    return TGateSpec(d=d, c3=pow(nu, j % 3, d), dagger=dagger)


# Optimal cubic classes (exponents of nu for the cubic coefficients) minimizing
# the fidelity-estimation shadow norm with one or two T gates.
OPTIMAL_CLASSES = {
    (7, 1): (2,),
    (7, 2): (1, 2),
    (13, 1): (0,),
    (13, 2): (0, 1),
    (19, 1): (2,),
    (19, 2): (0, 2),
    (31, 1): (0,),
    (31, 2): (0, 2),
}


def optimal_tspecs(d: int, k: int) -> tuple[TGateSpec, ...]:
    """Best k-gate choice where tabulated; canonical gates elsewhere.

    For d = 3 and d = 2 mod 3 all T gates perform identically, so the
    canonical gate is returned for any k.
    """
    validate_modulus(d)
    if d % 3 == 1:
        if (d, k) not in OPTIMAL_CLASSES:
            raise UnsupportedSpec(f"no tabulated optimal choice for d={d}, k={k}")
        return tuple(tspec_from_class(d, j) for j in OPTIMAL_CLASSES[(d, k)])
    return tuple(canonical_tspec(d) for _ in range(k))
