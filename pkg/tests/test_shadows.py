import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qushadow.circuit import Circuit, gate_f, gate_s, gate_t, gate_u, ghz_circuit, label_word
from qushadow.dense import dense_apply, weyl_matrix
from qushadow.gadget import gadgetize, sample_outcome_sequential
from qushadow.shadows import (BadGrouping, ConfigError, Estimate, ExperimentConfig,
                              ObservableSpec, SchemeMismatch, ShadowShot, UnsupportedSpec,
                              aggregate, fidelity_shot, gamma_tilde, gme_flag, norm_bounds,
                              norm_stab_projector, run_values, run_values_pure,
                              weyl_local_shot)
from qushadow.sympl import sample_clifford
from qushadow.tgate import canonical_tspec
from qushadow.verify import _single_qudit_labels


def test_fidelity_shot_matches_dense():
    rng = np.random.default_rng(37)
    n, d = 2, 3
    target = ghz_circuit(n, d)
    spec = ObservableSpec("stabilizer-state-projector", target=target)
    psi = dense_apply(target).amps
    for _ in range(20):
        label = sample_clifford(n, d, rng)
        word = Circuit(n, d, tuple(label_word(label)))
        phi = dense_apply(word, dense_apply(target)).amps
        probs = np.abs(phi) ** 2
        idx = rng.choice(9, p=probs / probs.sum())
        x = np.unravel_index(idx, (d, d))
        shot = ShadowShot("global-clifford", n, d, label, tuple(int(c) for c in x))
        expected = (d ** n + 1) * probs[idx] / probs.sum() - 1.0
        assert fidelity_shot(shot, spec) == pytest.approx(expected, abs=1e-9)


def test_local_estimator_unbiased_exhaustively():
    d = 3
    circ = Circuit(1, d, (gate_f(0), gate_s(0, 1), gate_u(0, 2)))
    psi = dense_apply(circ).amps
    rho = np.outer(psi, psi.conj())
    labels = _single_qudit_labels(d)
    for u in ((1, 0), (0, 1), (1, 2), (2, 2)):
        target = complex(np.trace(weyl_matrix(u, d) @ rho))
        acc = 0.0j
        for label in labels:
            phi = dense_apply(Circuit(1, d, tuple(label_word(label))), dense_apply(circ)).amps
            probs = np.abs(phi) ** 2
            for b in range(d):
                shot = ShadowShot("local-clifford", 1, d, (label,), (b,))
                acc += probs[b] * weyl_local_shot(shot, u)
        assert acc / len(labels) == pytest.approx(target, abs=1e-9)


def test_run_values_matches_pure_twin():
    configs = [
        ExperimentConfig(d=3, n=2, shots=120, runs=2, seed=5),
        ExperimentConfig(d=3, n=2, scheme="clifford+t", k=1, shots=120, runs=2, seed=5),
        ExperimentConfig(d=5, n=2, scheme="clifford+t", k=2, shots=60, runs=1, seed=9),
        ExperimentConfig(d=3, n=3, state="depolarized-ghz", depolarize=0.4,
                         shots=120, runs=1, seed=3),
        ExperimentConfig(d=3, n=4, state="cluster", lattice=(2, 2), shots=60, runs=1, seed=8),
    ]
    for config in configs:
        fast = run_values(config, 0)
        pure = run_values_pure(config, 0)
        assert np.array_equal(fast, pure)


def test_estimator_unbiased_on_ghz():
    config = ExperimentConfig(d=3, n=3, shots=3000, runs=1, seed=12)
    values = run_values(config, 0)
    sigma = values.std(ddof=1) / np.sqrt(values.size)
    assert abs(values.mean() - 1.0) < 4 * sigma


def test_aggregate_mean_and_median_of_means():
    values = np.full(40, 0.25)
    est = aggregate(values)
    assert est.value == 0.25 and est.variance_est == 0.0
    values = np.arange(10.0)
    mom = aggregate(values, ("median-of-means", 10))
    assert mom.value == np.median(values)
    assert mom.aggregation == "median-of-means(10)"
    with pytest.raises(BadGrouping):
        aggregate(np.arange(10.0), ("median-of-means", 3))


def test_gme_flag():
    est = Estimate(0.8, 1000, "mean", 1e-4)
    assert gme_flag(est, 3)
    assert not gme_flag(Estimate(0.34, 1000, "mean", 1e-4), 3)


@given(st.sampled_from([3, 5, 7]), st.integers(0, 3))
def test_projector_ratio_decreasing_in_rank(d, j):
    n = 5
    assert norm_stab_projector(n, d, d ** j) > norm_stab_projector(n, d, d ** (j + 1))


@given(st.integers(2, 6))
def test_projector_ratio_increasing_in_dimension(n):
    pairs = [(3, 5), (5, 7), (7, 11)]
    for d1, d2 in pairs:
        assert norm_stab_projector(n, d1, 1) < norm_stab_projector(n, d2, 1)


def test_gamma_tilde_anchors():
    assert gamma_tilde(3, 1) == pytest.approx(3 + 4 / 3)
    assert gamma_tilde(7, 1) == pytest.approx(7.5)
    assert gamma_tilde(5, 2) == pytest.approx(3 + 8 * 3 / 25)
    with pytest.raises(ValueError):
        gamma_tilde(3, 0)


def test_norm_bounds_projector():
    spec = ObservableSpec("stabilizer-projector", rank=3)
    report = norm_bounds(spec, "global-clifford", d=3, n=4)
    hs2 = 3 * (1 - 3 / 81)
    assert report.exact == pytest.approx(norm_stab_projector(4, 3, 3) * hs2)
    assert report.lower <= report.exact <= report.upper


def test_norm_bounds_single_qudit_diagonal():
    terms = ((0.5, (1, 0)), (0.5, (2, 0)))
    spec = ObservableSpec("weyl-sum", terms=terms)
    report = norm_bounds(spec, "global-clifford", d=3, n=1)
    assert report.exact is not None


def test_norm_bounds_local_weyl():
    spec = ObservableSpec("weyl-sum", terms=((1.0, (1, 0, 2, 1)),))
    report = norm_bounds(spec, "local-clifford", d=3, n=2)
    assert report.exact == pytest.approx(16.0)
    multi = ObservableSpec("weyl-sum", terms=((0.5, (1, 0, 0, 0)), (0.5, (0, 1, 0, 0))))
    with pytest.raises(UnsupportedSpec):
        norm_bounds(multi, "local-clifford", d=3, n=2)


def test_norm_bounds_magic_layer():
    target = Circuit(2, 3, ghz_circuit(2, 3).gates + (gate_t(0, canonical_tspec(3)),))
    spec = ObservableSpec("t-modified-target", target=target)
    report = norm_bounds(spec, "clifford+t", d=3, n=2, k=1)
    hs2 = 1 - 1 / 9
    assert report.upper == pytest.approx(gamma_tilde(3, 1) * hs2)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(d=4, n=2, shots=10, runs=1, seed=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(d=3, n=2, shots=10, runs=1, seed=None)
    with pytest.raises(ConfigError):
        ExperimentConfig(d=3, n=2, k=1, shots=10, runs=1, seed=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(d=3, n=2, shots=10, runs=1, groups=3, seed=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(d=3, n=5, state="cluster", lattice=(2, 2), shots=10, runs=1, seed=0)
    config = ExperimentConfig(d=3, n=2, state="depolarized-ghz", depolarize=0.3,
                              shots=10, runs=1, seed=0)
    assert config.truth() == pytest.approx(1 - 0.3 + 0.3 / 9)


def test_magic_layer_variance_drops():
    base = ExperimentConfig(d=5, n=4, shots=4000, runs=1, seed=21)
    magic = ExperimentConfig(d=5, n=4, scheme="clifford+t", k=1, shots=4000, runs=1, seed=21)
    v0 = run_values(base, 0).var()
    v1 = run_values(magic, 0).var()
    assert v1 < v0


def test_t_gate_duality_soft_trend():
    d, n, shots = 3, 2, 4000
    spec = canonical_tspec(d)
    tstate = Circuit(n, d, ghz_circuit(n, d).gates + (gate_t(0, spec),))
    rng = np.random.default_rng(77)
    target_obs = ObservableSpec("t-modified-target", target=tstate)
    vals_t = np.empty(shots)
    for s in range(shots):
        layer = sample_clifford(n, d, rng)
        gc = gadgetize(tstate, ensemble_specs=(spec,), clifford=layer)
        x = sample_outcome_sequential(gc, rng)
        shot = ShadowShot("clifford+t", n, d, layer, tuple(int(c) for c in x),
                          t_layer=(spec,))
        vals_t[s] = fidelity_shot(shot, target_obs)
    config = ExperimentConfig(d=d, n=n, scheme="clifford+t", k=2, shots=shots,
                              runs=1, seed=77)
    vals_k2 = run_values(config, 0)
    assert np.isclose(vals_t.mean(), 1.0, atol=5 * vals_t.std(ddof=1) / np.sqrt(shots))
    ratio = vals_t.var() / vals_k2.var()
    assert 0.5 < ratio < 2.0
