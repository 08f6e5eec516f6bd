import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qushadow.dense import weyl_matrix
from qushadow.weyl import (WeylOperator, from_local, symplectic_product, to_local, vector,
                           weight, weight_profile, weyl_compose, weyl_identity)


def vectors(d, n):
    return st.lists(st.integers(0, d - 1), min_size=2 * n, max_size=2 * n)


@given(vectors(5, 2), vectors(5, 2))
def test_symplectic_product_antisymmetric(u, v):
    assert (symplectic_product(u, v, 5) + symplectic_product(v, u, 5)) % 5 == 0


@given(vectors(3, 2), vectors(3, 2), vectors(3, 2))
def test_symplectic_product_bilinear(u, v, w):
    uv = (np.array(u) + np.array(v)) % 3
    lhs = symplectic_product(uv, w, 3)
    rhs = (symplectic_product(u, w, 3) + symplectic_product(v, w, 3)) % 3
    assert lhs == rhs


@given(vectors(3, 3))
def test_local_layout_roundtrip(u):
    u = np.array(u)
    assert np.array_equal(from_local(to_local(u)), u)
    assert weight(u) == sum((u[j], u[j + 3]) != (0, 0) for j in range(3))


def test_vector_layout():
    u = vector([1, 0], [0, 2], 3)
    assert list(u) == [1, 0, 0, 2]


@pytest.mark.parametrize("d", [3, 5])
def test_weyl_dense_composition(d):
    for u in ((1, 0), (0, 1), (1, 2), (2, 1)):
        for v in ((1, 1), (2, 0), (0, 2), (1, 2)):
            w = weyl_compose(WeylOperator(u, 0, d), WeylOperator(v, 0, d))
            dense = weyl_matrix(u, d) @ weyl_matrix(v, d)
            phase = np.exp(2j * np.pi * w.phase / d)
            assert np.allclose(dense, phase * weyl_matrix(w.u, d), atol=1e-12)


@pytest.mark.parametrize("d", [3, 5])
def test_weyl_dense_unitary_traceless(d):
    for u in ((1, 0), (0, 2), (2, 2)):
        m = weyl_matrix(u, d)
        assert np.allclose(m @ m.conj().T, np.eye(d), atol=1e-12)
        assert abs(np.trace(m)) < 1e-12
        power = np.linalg.matrix_power(m, d)
        assert np.allclose(power, np.eye(d), atol=1e-10)


def test_weyl_identity_neutral():
    e = weyl_identity(2, 3)
    w = WeylOperator([1, 2, 0, 1], 2, 3)
    assert weyl_compose(e, w) == w
    adj = weyl_compose(w.adjoint(), w)
    assert adj == weyl_identity(2, 3)


@given(vectors(3, 2), vectors(3, 2))
def test_weight_profile_join(u, v):
    prof = weight_profile(u, v, 3)
    support = sum(1 for j in range(2)
                  if (u[j], u[j + 2]) != (0, 0) or (v[j], v[j + 2]) != (0, 0))
    assert prof.join == support
