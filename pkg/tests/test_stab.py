from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qushadow.circuit import Circuit, circuit_clifford_label, gate_cx, gate_f, ghz_circuit
from qushadow.linalg import rank_mod, row_basis, in_rowspace
from qushadow.stab import (apply_clifford, apply_named_gate, basis_lagrangian, block_echelon,
                           canonical_tableau, lagrangian_from_tableau, measure_all,
                           outcome_probability, overlap2, tableau_from_generating,
                           zero_state_generating)


def test_zero_state_probabilities():
    lag = lagrangian_from_tableau(canonical_tableau(2, 3))
    assert outcome_probability(lag, (0, 0)) == 1
    assert outcome_probability(lag, (1, 0)) == 0


@pytest.mark.parametrize("n,d", [(2, 3), (3, 5)])
def test_ghz_outcome_probabilities(n, d):
    label = circuit_clifford_label(ghz_circuit(n, d))
    lag = lagrangian_from_tableau(apply_clifford(canonical_tableau(n, d), label))
    for c in range(d):
        assert outcome_probability(lag, (c,) * n) == Fraction(1, d)
    assert outcome_probability(lag, (0, 1) + (0,) * (n - 2)) == 0


def test_generating_and_tableau_routes_agree():
    label = circuit_clifford_label(ghz_circuit(3, 3))
    g = apply_clifford(zero_state_generating(3, 3), label)
    t = apply_clifford(canonical_tableau(3, 3), label)
    lag_g = lagrangian_from_tableau(tableau_from_generating(g))
    lag_t = lagrangian_from_tableau(t)
    for x in ((0, 0, 0), (1, 1, 1), (1, 0, 0)):
        assert outcome_probability(lag_g, x) == outcome_probability(lag_t, x)


def test_apply_named_gate_matches_label():
    circ = Circuit(2, 5, (gate_f(0), gate_cx(0, 1)))
    state = canonical_tableau(2, 5)
    for gate in circ.gates:
        state = apply_named_gate(state, gate)
    direct = apply_clifford(canonical_tableau(2, 5), circuit_clifford_label(circ))
    lag_a, lag_b = lagrangian_from_tableau(state), lagrangian_from_tableau(direct)
    for x in ((0, 0), (1, 2), (4, 4)):
        assert outcome_probability(lag_a, x) == outcome_probability(lag_b, x)


def test_overlap2_symmetry_and_normalization():
    ghz = lagrangian_from_tableau(
        apply_clifford(canonical_tableau(2, 3), circuit_clifford_label(ghz_circuit(2, 3))))
    basis = basis_lagrangian((0, 0), 3)
    assert overlap2(ghz, ghz) == 1
    assert overlap2(ghz, basis) == overlap2(basis, ghz) == Fraction(1, 3)


def test_measure_all_supported_outcomes():
    rng = np.random.default_rng(23)
    ghz = lagrangian_from_tableau(
        apply_clifford(canonical_tableau(3, 3), circuit_clifford_label(ghz_circuit(3, 3))))
    for _ in range(25):
        x = measure_all(ghz, rng)
        assert outcome_probability(ghz, x) > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([3, 5]))
def test_block_echelon_preserves_rowspace(seed, d):
    rng = np.random.default_rng(seed)
    rows, cols = int(rng.integers(2, 6)), int(rng.integers(2, 5))
    mat = rng.integers(0, d, size=(rows, 2 * cols + 1))
    before = mat[:, :cols].copy()
    work = mat.copy()
    block_echelon(work, d, "z", cols=(0, cols))
    after = work[:, :cols]
    assert rank_mod(before, d) == rank_mod(after, d)
    for row in after:
        assert in_rowspace(row, row_basis(before, d), d) or not row.any()
