import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qushadow.field import (CubicCharacterTable, NotPrime, ZeroInverse, cubic_character,
                            fe_inv, half, inverse_table, is_odd_prime, primitive_element,
                            validate_modulus)

PRIMES = (3, 5, 7, 11, 13)


def test_is_odd_prime():
    assert [p for p in range(2, 20) if is_odd_prime(p)] == [3, 5, 7, 11, 13, 17, 19]


@pytest.mark.parametrize("bad", [0, 1, 2, 4, 9, 15])
def test_validate_modulus_rejects(bad):
    with pytest.raises(NotPrime):
        validate_modulus(bad)


@pytest.mark.parametrize("d", PRIMES)
def test_half_doubles_to_one(d):
    assert (2 * half(d)) % d == 1


@pytest.mark.parametrize("d", PRIMES)
def test_inverse_table(d):
    inv = inverse_table(d)
    assert inv[0] == 0
    for a in range(1, d):
        assert (a * inv[a]) % d == 1
        assert fe_inv(a, d) == inv[a]


def test_fe_inv_zero_raises():
    with pytest.raises(ZeroInverse):
        fe_inv(0, 5)


@pytest.mark.parametrize("d", PRIMES)
def test_primitive_element_order(d):
    g = primitive_element(d)
    powers = {pow(g, e, d) for e in range(d - 1)}
    assert len(powers) == d - 1


@given(st.integers(1, 6), st.integers(1, 6))
def test_cubic_character_multiplicative(a, b):
    table = CubicCharacterTable.build(7)
    assert cubic_character(a * b % 7, table) == (cubic_character(a, table)
                                                 + cubic_character(b, table)) % 3


def test_cubic_character_classes_balanced():
    table = CubicCharacterTable.build(13)
    counts = np.bincount([cubic_character(a, table) for a in range(1, 13)], minlength=3)
    assert list(counts) == [4, 4, 4]
