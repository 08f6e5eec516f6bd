import numpy as np
import pytest

from qushadow.circuit import Circuit, gate_cx, gate_f, gate_s, gate_t, ghz_circuit
from qushadow.dense import dense_outcome_distribution
from qushadow.gadget import (ANCILLA_CAP, GadgetCircuit, TooManyAncillas,
                             constrain_stabilizers, gadget_state, gadgetize,
                             magic_overlap_trace, outcome_distribution,
                             prefix_probability, sample_outcome_sequential)
from qushadow.sympl import sample_clifford
from qushadow.tgate import TGateSpec, canonical_tspec


def t_circuit(n, d, spec, extra=()):
    gates = (gate_f(0), gate_t(0, spec)) + tuple(extra)
    return Circuit(n, d, gates)


def test_gadgetize_counts_ancillas():
    spec = canonical_tspec(3)
    circ = t_circuit(2, 3, spec, extra=(gate_cx(0, 1),))
    gc = gadgetize(circ, ensemble_specs=(spec,))
    assert gc.t == 2
    assert gc.circuit.n == 4
    assert gc.circuit.t_count == 0


def test_gadgetize_cap():
    spec = canonical_tspec(3)
    circ = Circuit(1, 3, tuple(gate_t(0, spec) for _ in range(ANCILLA_CAP + 1)))
    with pytest.raises(TooManyAncillas):
        gadgetize(circ)


def test_magic_trace_without_ancillas_is_unity():
    gc = gadgetize(ghz_circuit(2, 3))
    res = constrain_stabilizers(gadget_state(gc), np.array([0, 0]), gc.n)
    assert res.flag
    assert magic_overlap_trace(res.g_gamma, ()) == 1.0
    dist = outcome_distribution(gc).reshape(-1)
    assert dist[0] == pytest.approx(1 / 3, abs=1e-12)


@pytest.mark.parametrize("d", [3, 5])
def test_distribution_normalized_and_dense_equal(d):
    spec = canonical_tspec(d)
    other = TGateSpec(d=3, c3=5, c2=1) if d == 3 else TGateSpec(d=5, c3=2, c2=3, c1=1)
    circ = t_circuit(2, d, spec, extra=(gate_cx(0, 1), gate_t(1, other), gate_s(1, d - 1)))
    gc = gadgetize(circ)
    dist = outcome_distribution(gc).reshape(-1)
    assert dist.sum() == pytest.approx(1.0, abs=1e-9)
    dense = dense_outcome_distribution(gc.circuit, 2, gc.postselect)
    assert np.allclose(dist, dense, atol=1e-9)


def test_prefix_marginal_consistency():
    spec = TGateSpec(d=3, c3=2, c2=2)
    circ = t_circuit(3, 3, spec, extra=(gate_cx(0, 2), gate_f(1)))
    gc = gadgetize(circ, ensemble_specs=(canonical_tspec(3),))
    full = outcome_distribution(gc)
    partial = outcome_distribution(gc, m=1)
    assert np.allclose(full.sum(axis=(1, 2)), partial, atol=1e-12)
    for x in ((0,), (0, 1), (2, 1, 0)):
        assert prefix_probability(gc, x) == pytest.approx(
            float(full[x].sum() if len(x) < 3 else full[x]), abs=1e-12)


def test_sequential_sampler_frequencies():
    rng = np.random.default_rng(31)
    spec = canonical_tspec(3)
    layer = sample_clifford(2, 3, rng)
    gc = gadgetize(ghz_circuit(2, 3), ensemble_specs=(spec,), clifford=layer)
    dist = outcome_distribution(gc).reshape(-1)
    counts = np.zeros(9)
    draws = 4000
    for _ in range(draws):
        x = sample_outcome_sequential(gc, rng)
        counts[3 * x[0] + x[1]] += 1
        assert dist[3 * x[0] + x[1]] > 0
    assert np.allclose(counts / draws, dist, atol=0.03)
