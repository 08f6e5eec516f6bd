import numpy as np
import pytest

from qushadow import _kernels
from qushadow.sympl import (apply_transvections, find_transvections, identity_label,
                            is_symplectic, pair_map, sample_clifford, sample_symplectic,
                            transvection_factorization)
from qushadow.weyl import symplectic_product


@pytest.mark.parametrize("n,d", [(1, 3), (2, 3), (2, 5), (3, 7)])
def test_sample_symplectic_lands_in_group(n, d):
    rng = np.random.default_rng(7)
    for _ in range(20):
        assert is_symplectic(sample_symplectic(n, d, rng), d)


@pytest.mark.parametrize("n,d", [(1, 5), (2, 3), (3, 5)])
def test_find_transvections_maps(n, d):
    rng = np.random.default_rng(11)
    for _ in range(40):
        x = rng.integers(0, d, size=2 * n)
        y = rng.integers(0, d, size=2 * n)
        if not x.any() or not y.any():
            continue
        ts = find_transvections(x, y, d)
        assert len(ts) <= 2
        assert np.array_equal(apply_transvections(ts, x, d), y % d)


@pytest.mark.parametrize("n,d", [(2, 3), (2, 5)])
def test_pair_map_sends_basis_pair(n, d):
    rng = np.random.default_rng(13)
    e = np.zeros(2 * n, dtype=np.int64)
    f = np.zeros(2 * n, dtype=np.int64)
    e[0] = 1
    f[n] = 1
    for _ in range(40):
        v = rng.integers(0, d, size=2 * n)
        if not v.any():
            continue
        partner = next((c for c in (rng.integers(0, d, size=2 * n) for _ in range(50))
                        if symplectic_product(v, c, d) == 1), None)
        if partner is None:
            continue
        ts = pair_map(v, partner, 0, d)
        assert np.array_equal(apply_transvections(ts, e, d), v % d)
        assert np.array_equal(apply_transvections(ts, f, d), partner % d)


@pytest.mark.parametrize("n,d", [(1, 3), (2, 5)])
def test_transvection_factorization_rebuilds(n, d):
    rng = np.random.default_rng(17)
    for _ in range(10):
        mat = sample_symplectic(n, d, rng)
        stages = transvection_factorization(mat, d)
        rebuilt = np.empty_like(mat)
        for col in range(2 * n):
            e = np.zeros(2 * n, dtype=np.int64)
            e[col] = 1
            for ts in reversed(stages):
                e = apply_transvections(ts, e, d)
            rebuilt[:, col] = e
        assert np.array_equal(rebuilt % d, mat % d)


def test_label_compose_inverse():
    rng = np.random.default_rng(19)
    for n, d in ((1, 3), (2, 5), (3, 3)):
        label = sample_clifford(n, d, rng)
        ident = label.compose(label.inverse())
        assert np.array_equal(ident.mat, identity_label(n, d).mat)
        assert np.array_equal(ident.g, identity_label(n, d).g)


@pytest.mark.parametrize("n,d", [(1, 3), (2, 3), (2, 5), (3, 7)])
def test_kernel_sampler_matches_pure(n, d):
    count = 25
    mats, gs = _kernels.sample_labels(n, d, count, np.random.default_rng(42))
    rng = np.random.default_rng(42)
    for i in range(count):
        label = sample_clifford(n, d, rng)
        assert np.array_equal(mats[i], label.mat)
        assert np.array_equal(gs[i], label.g)
