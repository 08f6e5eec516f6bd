"""Arithmetic over the prime field F_d and cubic-character data for T-gate selection.

Field elements are plain machine integers reduced mod d. Every public entry
point validates that d is an odd prime below 2^16; the binary case d = 2 is
rejected because all phase conventions downstream assume 2 is invertible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NotPrime(ValueError):
    pass


class ZeroInverse(ZeroDivisionError):
    pass


class ZeroArgument(ValueError):
    pass


class WrongResidueClass(ValueError):
    pass


MAX_MODULUS = 1 << 16

# Tabulated primitive elements for odd primes below 50; larger moduli fall
# back to the smallest primitive root, found by exhaustive order check.
PRIMITIVE_ROOTS = {
    3: 2, 5: 2, 7: 3, 11: 2, 13: 2, 17: 3, 19: 2,
    23: 5, 29: 2, 31: 3, 37: 2, 41: 6, 43: 3, 47: 5,
}


def is_odd_prime(d: int) -> bool:
    if d < 3 or d % 2 == 0:
        return False
    f = 3
    while f * f <= d:
        if d % f == 0:
            return False
        f += 2
    return True


def validate_modulus(d) -> int:
    d = int(d)
    if not is_odd_prime(d) or d >= MAX_MODULUS:
        raise NotPrime(f"modulus must be an odd prime below 2^16, got {d}")
    return d


def half(d: int) -> int:
    """2^{-1} mod d, i.e. (d+1)/2 for odd d."""
    return (d + 1) // 2


def inverse_table(d: int) -> np.ndarray:
    """Array inv with inv[a]*a = 1 mod d for a in 1..d-1; inv[0] = 0."""
    d = validate_modulus(d)
    a = np.arange(d, dtype=np.int64)
    inv = np.argmax(a[:, None] * a % d == 1, axis=1)
    inv[0] = 0
    return inv.astype(np.int64)


def fe_inv(a: int, d: int) -> int:
    """Multiplicative inverse of a mod d."""
    d = validate_modulus(d)
    a = int(a) % d
    if a == 0:
        raise ZeroInverse(f"0 has no inverse mod {d}")
    return pow(a, d - 2, d)


def _prime_factors(m: int) -> list[int]:
    out = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        out.append(m)
    return out


def primitive_element(d: int) -> int:
    """A generator of F_d^x: the tabulated choice for d < 50, else the smallest one."""
    d = validate_modulus(d)
    if d in PRIMITIVE_ROOTS:
        return PRIMITIVE_ROOTS[d]
    factors = _prime_factors(d - 1)
    for g in range(2, d):
        if all(pow(g, (d - 1) // f, d) != 1 for f in factors):
            return g
    raise NotPrime(f"no primitive root found, {d} is not prime")


@dataclass(frozen=True)
class CubicCharacterTable:
    """Discrete-log-mod-3 table over F_d^x for d = 1 mod 3.

    chi3[c] = j mod 3 where c = nu^j, so chi3 is multiplicative and vanishes
    exactly on cubic residues.
    """

    d: int
    nu: int
    chi3: np.ndarray

    @classmethod
    def build(cls, d: int) -> "CubicCharacterTable":
        d = validate_modulus(d)
        if d % 3 != 1:
            raise WrongResidueClass(f"cubic character needs d = 1 mod 3, got d = {d}")
        nu = primitive_element(d)
        chi3 = np.zeros(d, dtype=np.int64)
        c = 1
        for j in range(d - 1):
            chi3[c] = j % 3
            c = c * nu % d
        return cls(d=d, nu=nu, chi3=chi3)


def cubic_character(c: int, table: CubicCharacterTable) -> int:
    """Exponent j in {0,1,2} with eta_3(c) = omega_3^j."""
    c = int(c) % table.d
    if c == 0:
        raise ZeroArgument("cubic character is undefined at 0")
    return int(table.chi3[c])
