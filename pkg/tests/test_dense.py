import numpy as np
import pytest

from qushadow.circuit import Circuit, circuit_clifford_label, gate_cx, gate_f, gate_t
from qushadow.dense import (DenseState, TooLarge, basis_state, dense_apply,
                            dense_outcome_distribution, enumerate_stab_states,
                            fourier_matrix, moment_operator, orbit_moment_operator,
                            orbit_tables, random_traceless_observable, shadow_norm_exact,
                            shadow_norm_orbit, stab_state_count, weyl_matrix, zero_state)
from qushadow.stab import (apply_clifford, canonical_tableau, lagrangian_from_tableau,
                           outcome_probability)
from qushadow.tgate import canonical_tspec, f_exponents, t_diagonal


def test_fourier_gate_action():
    psi = dense_apply(Circuit(1, 5, (gate_f(0),)))
    assert np.allclose(psi.amps, np.full(5, 1 / np.sqrt(5)), atol=1e-12)
    assert np.allclose(fourier_matrix(5) @ fourier_matrix(5).conj().T, np.eye(5), atol=1e-12)


def test_cx_and_t_gate_action():
    psi = dense_apply(Circuit(2, 3, (gate_f(0), gate_cx(0, 1))))
    expect = np.zeros(9, dtype=complex)
    expect[[0, 4, 8]] = 1 / np.sqrt(3)
    assert np.allclose(psi.amps, expect, atol=1e-12)
    spec = canonical_tspec(3)
    psi = dense_apply(Circuit(1, 3, (gate_f(0), gate_t(0, spec))))
    phases = np.exp(2j * np.pi * f_exponents(spec) / spec.phase_modulus)
    assert np.allclose(psi.amps, phases / np.sqrt(3), atol=1e-12)
    assert np.allclose(t_diagonal(spec), phases, atol=1e-12)


@pytest.mark.parametrize("n,d,count", [(1, 3, 12), (1, 5, 30), (2, 3, 360)])
def test_stab_state_enumeration(n, d, count):
    states = enumerate_stab_states(n, d)
    assert stab_state_count(n, d) == count
    assert len(states) == count
    for psi in states[:10]:
        assert np.isclose(np.linalg.norm(psi), 1.0, atol=1e-12)


def test_moment_operator_structure():
    mom = moment_operator("stab-orbit", 1, 3)
    q = mom.q
    assert np.allclose(q, q.conj().T, atol=1e-12)
    eig = np.linalg.eigvalsh(q)
    assert eig.min() > -1e-12
    q6 = q.reshape((3,) * 6)
    swapped = q6.transpose(1, 0, 2, 4, 3, 5)
    assert np.allclose(q6, swapped, atol=1e-12)


def test_moment_operator_caps():
    with pytest.raises(TooLarge):
        moment_operator("stab-orbit", 2, 7)


def test_random_observable_shapes():
    rng = np.random.default_rng(3)
    obs = random_traceless_observable(2, 3, rng)
    assert np.allclose(obs, obs.conj().T, atol=1e-12)
    assert abs(np.trace(obs)) < 1e-10
    assert np.isclose(np.linalg.norm(obs), 1.0, atol=1e-12)
    diag = random_traceless_observable(1, 5, rng, diagonal=True)
    assert np.allclose(diag, np.diag(np.diag(diag)), atol=1e-12)


@pytest.mark.parametrize("d", [3, 5])
def test_orbit_and_dense_norms_agree(d):
    rng = np.random.default_rng(5)
    tabs = orbit_tables(1, d)
    mom = moment_operator("stab-orbit", 1, d)
    spec = canonical_tspec(d)
    mom_magic = orbit_moment_operator(tabs, (spec,))
    for _ in range(5):
        obs = random_traceless_observable(1, d, rng)
        plain = shadow_norm_orbit(obs, tabs)
        assert plain == pytest.approx(shadow_norm_exact(obs, mom), abs=1e-9)
        magic = shadow_norm_orbit(obs, tabs, (spec,))
        assert magic == pytest.approx(shadow_norm_exact(obs, mom_magic), abs=1e-9)


def test_orbit_norms_at_two_qudits():
    rng = np.random.default_rng(8)
    tabs = orbit_tables(2, 3)
    mom = moment_operator("stab-orbit", 2, 3)
    obs = random_traceless_observable(2, 3, rng)
    assert shadow_norm_orbit(obs, tabs) == pytest.approx(shadow_norm_exact(obs, mom), abs=1e-9)


def test_dense_outcome_distribution_matches_engine():
    circ = Circuit(2, 3, (gate_f(0), gate_cx(0, 1)))
    probs = dense_outcome_distribution(circ, 2)
    lag = lagrangian_from_tableau(
        apply_clifford(canonical_tableau(2, 3), circuit_clifford_label(circ)))
    for idx in range(9):
        x = np.unravel_index(idx, (3, 3))
        assert probs[idx] == pytest.approx(float(outcome_probability(lag, x)), abs=1e-12)


def test_basis_and_zero_states():
    assert np.array_equal(zero_state(2, 3).amps, basis_state((0, 0), 2, 3).amps)
    amp = basis_state((1, 2), 2, 3).amps
    assert amp[1 * 3 + 2] == 1.0 and np.count_nonzero(amp) == 1


def test_weyl_matrix_commutation_phase():
    d = 5
    u, v = (1, 2), (3, 1)
    wu, wv = weyl_matrix(u, d), weyl_matrix(v, d)
    sp = (u[0] * v[1] - u[1] * v[0]) % d
    lhs = wu @ wv
    rhs = np.exp(2j * np.pi * sp / d) * wv @ wu
    assert np.allclose(lhs, rhs, atol=1e-12)
