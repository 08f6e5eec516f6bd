"""Shadow estimation: shot estimators, aggregation, closed-form norms, experiments.

A shot applies a random unitary from the chosen scheme, measures, and keeps
(scheme, unitary, outcome). For global schemes the reconstruction collapses to
ohat = (D+1) q - 1 with q the Born probability of the observed outcome on the
evolved target, so fidelity estimation never leaves the stabilizer/gadget
engines. Norm formulas and bounds are closed forms; the matching oracle values
live in the dense module.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import (Circuit, basis_circuit, circuit_clifford_label, cluster_circuit,
                      gate_cx, gate_f, ghz_circuit)
from .field import is_odd_prime
from .gadget import gadgetize, prefix_probability, sample_outcome_sequential
from .stab import apply_clifford, canonical_tableau, lagrangian_from_tableau, outcome_probability
from .sympl import CliffordLabel, sample_clifford
from .tgate import TGateSpec, canonical_tspec, weyl_expectations
from .weyl import DimensionMismatch, as_vector, symplectic_product, weight

SCHEMES = ("global-clifford", "local-clifford", "clifford+t")
OBSERVABLE_KINDS = ("stabilizer-state-projector", "stabilizer-projector",
                    "t-modified-target", "weyl-sum")


class SchemeMismatch(ValueError):
    pass


class BadGrouping(ValueError):
    pass


class BadRank(ValueError):
    pass


class UnsupportedSpec(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ShadowShot:
    """One randomized measurement: scheme, sampled unitary, magic layer, outcome."""

    scheme: str
    n: int
    d: int
    unitary: CliffordLabel | tuple[CliffordLabel, ...]
    outcome: np.ndarray
    t_layer: tuple[TGateSpec, ...] = ()

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise SchemeMismatch(f"unknown scheme {self.scheme!r}")
        outcome = np.asarray(self.outcome, dtype=np.int64) % self.d
        if outcome.shape != (self.n,):
            raise DimensionMismatch(f"outcome shape {outcome.shape}, expected ({self.n},)")
        object.__setattr__(self, "outcome", outcome)
        if self.scheme == "local-clifford":
            if self.t_layer:
                raise SchemeMismatch("the local scheme carries no magic layer")
            if not isinstance(self.unitary, tuple) or len(self.unitary) != self.n:
                raise SchemeMismatch("the local scheme needs one single-qudit label per site")
            if any(lab.n != 1 or lab.d != self.d for lab in self.unitary):
                raise DimensionMismatch("local labels must be single-qudit at dimension d")
        else:
            if not isinstance(self.unitary, CliffordLabel):
                raise SchemeMismatch("global schemes need one CliffordLabel")
            if self.unitary.n != self.n or self.unitary.d != self.d:
                raise DimensionMismatch("label does not act on the shot's system")
            if self.scheme == "clifford+t":
                if not 1 <= len(self.t_layer) <= self.n:
                    raise SchemeMismatch("clifford+t needs between 1 and n magic sites")
                if any(sp.d != self.d for sp in self.t_layer):
                    raise DimensionMismatch("magic-site dimension does not match d")
            elif self.t_layer:
                raise SchemeMismatch("global-clifford carries no magic layer")


@dataclass(frozen=True)
class Estimate:
    value: float
    n_shots: int
    aggregation: str
    variance_est: float


@dataclass(frozen=True)
class ObservableSpec:
    """Observable named by structure: a projector onto a prepared target, a
    rank-K stabilizer projector, or a sum of Weyl terms (coefficient, vector).
    """

    kind: str
    target: Circuit | None = None
    rank: int = 1
    t_count: int = 0
    terms: tuple[tuple[complex, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        if self.kind not in OBSERVABLE_KINDS:
            raise UnsupportedSpec(f"unknown observable kind {self.kind!r}")
        if self.kind == "weyl-sum":
            if not self.terms:
                raise UnsupportedSpec("weyl-sum needs at least one term")
            terms = tuple((complex(c), tuple(int(a) for a in u)) for c, u in self.terms)
            sizes = {len(u) for _, u in terms}
            if len(sizes) != 1 or next(iter(sizes)) % 2:
                raise UnsupportedSpec("weyl-sum terms need one common even vector length")
            object.__setattr__(self, "terms", terms)
        elif self.kind == "stabilizer-projector":
            if self.rank < 1:
                raise BadRank(f"rank {self.rank} is not positive")
        else:
            if self.target is not None:
                object.__setattr__(self, "t_count", self.target.t_count)
            if self.kind == "stabilizer-state-projector" and self.t_count:
                raise UnsupportedSpec("stabilizer targets take a magic-free preparation")
            if self.kind == "t-modified-target" and self.t_count < 1:
                raise UnsupportedSpec("a T-modified target needs at least one magic gate")


@dataclass(frozen=True)
class NormReport:
    """Squared-shadow-norm report: bounds always, the exact value when known."""

    exact: float | None
    lower: float
    upper: float
    source: str

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.exact is not None and not self.lower - 1e-12 <= self.exact <= self.upper + 1e-12:
            raise ValueError(f"exact value {self.exact} escapes [{self.lower}, {self.upper}]")


# ---------------------------------------------------------------------------
# Single-shot estimators.

def fidelity_shot(shot: ShadowShot, target: ObservableSpec) -> float:
    """Fidelity estimator (D+1) q - 1 for a prepared pure target from one shot."""
    if shot.scheme == "local-clifford":
        raise SchemeMismatch("fidelity estimation needs the global or magic-layer scheme")
    if target.kind not in ("stabilizer-state-projector", "t-modified-target") \
            or target.target is None:
        raise UnsupportedSpec("fidelity targets are prepared pure states")
    prep = target.target
    if (prep.n, prep.d) != (shot.n, shot.d):
        raise DimensionMismatch("target and shot act on different systems")
    D = shot.d ** shot.n
    if prep.t_count == 0 and not shot.t_layer:
        tab = apply_clifford(canonical_tableau(shot.n, shot.d), circuit_clifford_label(prep))
        tab = apply_clifford(tab, shot.unitary)
        q = float(outcome_probability(lagrangian_from_tableau(tab), shot.outcome))
    else:
        circ = gadgetize(prep, ensemble_specs=shot.t_layer, clifford=shot.unitary)
        q = prefix_probability(circ, shot.outcome)
    return (D + 1) * q - 1.0


def weyl_local_shot(shot: ShadowShot, term) -> complex:
    """Single-shot estimator of tr(W_u rho) under the local scheme.

    Sites where the term is the identity contribute a factor 1; elsewhere the
    inverted single-site channel gives (d+1) <b|U W U^dagger|b>, which vanishes
    unless the conjugated Weyl operator is diagonal.
    """
    if shot.scheme != "local-clifford":
        raise SchemeMismatch("Weyl terms are estimated under the local scheme")
    n, d = shot.n, shot.d
    u = as_vector(term) % d
    if u.size != 2 * n:
        raise DimensionMismatch(f"term length {u.size} does not match {n} sites")
    out = complex(1.0)
    for j, lab in enumerate(shot.unitary):
        p, q = int(u[j]), int(u[n + j])
        if p == 0 and q == 0:
            continue
        v = lab.mat @ np.array([p, q], dtype=np.int64) % d
        if v[1]:
            return 0j
        ph = (symplectic_product(lab.g, v, d) + int(v[0]) * int(shot.outcome[j])) % d
        out *= (d + 1) * np.exp(2j * np.pi * ph / d)
    return out


def aggregate(values, method="mean") -> Estimate:
    """Mean or median-of-means summary of shot values."""
    vals = np.asarray(values, dtype=np.float64).ravel()
    if vals.size == 0:
        raise BadGrouping("no values to aggregate")
    if method == "mean":
        value, label = float(vals.mean()), "mean"
    else:
        kind, groups = method
        if kind != "median-of-means":
            raise BadGrouping(f"unknown aggregation {method!r}")
        groups = int(groups)
        if groups < 1 or vals.size % groups:
            raise BadGrouping(f"{groups} groups do not tile {vals.size} values")
        value = float(np.median(vals.reshape(groups, -1).mean(axis=1)))
        label = f"median-of-means({groups})"
    var = float(vals.var(ddof=1) / vals.size) if vals.size > 1 else 0.0
    return Estimate(value, int(vals.size), label, var)


def gme_flag(est: Estimate, d: int) -> bool:
    """GHZ fidelity certifiably above the biseparable ceiling 1/d."""
    return est.value > 1.0 / d + 3.0 * est.variance_est ** 0.5


# ---------------------------------------------------------------------------
# Closed-form norms and bounds.

def norm_stab_projector(n: int, d: int, rank: int) -> float:
    """Exact squared-shadow-norm to squared-HS-norm ratio for stabilizer projectors."""
    D = d ** n
    r = 1
    while r < rank:
        r *= d
    if rank < 1 or r != rank or rank > d ** (n - 1):
        raise BadRank(f"rank {rank} is not a power of d inside [1, d^(n-1)]")
    return (D + 1) / (D + d) * (d - 1 - d / D + d / rank)


def gamma_tilde(d: int, k: int) -> float:
    """Variance-bound coefficient of a k-site diagonal-magic measurement ensemble."""
    if k < 1:
        raise ValueError("the magic layer has at least one site")
    if d % 3 == 1:
        return 3 + 9 / 8 * 4 ** k / d ** (k - 1)
    return 3 + 2 ** (k + 1) * (d - 2) / d ** k


def _weyl_sum_norms(spec: ObservableSpec, d: int, n: int) -> tuple[float, float, bool]:
    """(squared HS norm, spectral norm, diagonal flag) of the traceless part."""
    from .dense import weyl_matrix
    D = d ** n
    mat = np.zeros((D, D), dtype=np.complex128)
    diagonal = True
    for c, u in spec.terms:
        uv = np.asarray(u, dtype=np.int64) % d
        if uv.size != 2 * n:
            raise UnsupportedSpec(f"term length {uv.size} does not match {n} sites")
        if uv[n:].any():
            diagonal = False
        if uv.any():
            mat += c * weyl_matrix(uv, d)
    hs2 = float(np.linalg.norm(mat) ** 2)
    op = float(np.linalg.norm(mat, 2))
    return hs2, op, diagonal


def norm_bounds(spec: ObservableSpec, scheme: str, d: int, n: int, k: int = 0) -> NormReport:
    """Closed-form squared-shadow-norm report for an observable's traceless part."""
    if scheme not in SCHEMES:
        raise UnsupportedSpec(f"unknown scheme {scheme!r}")
    if scheme == "clifford+t":
        if k < 1:
            raise UnsupportedSpec("clifford+t needs k >= 1 magic sites")
    elif k:
        raise UnsupportedSpec(f"scheme {scheme} carries no magic sites")
    D = d ** n

    if scheme == "local-clifford":
        if spec.kind != "weyl-sum":
            raise UnsupportedSpec("the local scheme estimates Weyl sums only")
        if len(spec.terms) != 1:
            raise UnsupportedSpec("local-scheme norms cover single Weyl terms")
        c, u = spec.terms[0]
        uv = as_vector(u) % d
        if uv.size != 2 * n:
            raise UnsupportedSpec(f"term length {uv.size} does not match {n} sites")
        exact = abs(c) ** 2 * (d + 1) ** weight(uv)
        return NormReport(exact, exact, exact, "locality power law")

    if spec.kind in ("stabilizer-state-projector", "t-modified-target"):
        rank = 1
    elif spec.kind == "stabilizer-projector":
        rank = spec.rank
    else:
        if n > 2:
            raise UnsupportedSpec("global-scheme Weyl sums are dense-evaluated, n <= 2")
        hs2, op, diagonal = _weyl_sum_norms(spec, d, n)
        if k:
            return NormReport(None, hs2, gamma_tilde(d, k) * hs2,
                              "HS lower bound; magic-layer upper bound")
        if diagonal and n == 1:
            exact = (d + 1) * op ** 2
            return NormReport(exact, hs2, exact, "single-qudit diagonal law")
        if diagonal:
            return NormReport(None, hs2, (d - 1) * hs2 + d * op ** 2,
                              "HS lower bound; diagonal-observable upper bound")
        return NormReport(None, hs2, (2 * d - 3) * hs2 + 2 * op ** 2,
                          "HS lower bound; general upper bound")

    frac = rank / D
    hs2 = rank * (1 - frac)
    op = max(1 - frac, frac)
    if k:
        return NormReport(None, hs2, gamma_tilde(d, k) * hs2,
                          "HS lower bound; magic-layer upper bound")
    if spec.kind == "t-modified-target":
        return NormReport(None, hs2, (2 * d - 3) * hs2 + 2 * op ** 2,
                          "HS lower bound; general upper bound")
    exact = norm_stab_projector(n, d, rank) * hs2
    upper = (2 * d - 3) * hs2 + 2 * op ** 2
    return NormReport(exact, hs2, upper,
                      "projector ratio law; HS lower bound; general upper bound")


# ---------------------------------------------------------------------------
# Experiment driver.

STATE_FAMILIES = ("ghz", "cluster", "depolarized-ghz")


@dataclass(frozen=True)
class ExperimentConfig:
    """One fidelity-estimation workload: state family, scheme, and shot budget."""

    d: int
    n: int
    scheme: str = "global-clifford"
    k: int = 0
    t_specs: tuple[TGateSpec, ...] = ()
    state: str = "ghz"
    depolarize: float = 0.0
    lattice: tuple[int, int] = (0, 0)
    shots: int = 1000
    runs: int = 10
    groups: int = 1
    seed: int | None = None
    workers: int = 1

    def __post_init__(self):
        if not is_odd_prime(self.d):
            raise ConfigError(f"d = {self.d} is not an odd prime")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if self.scheme == "global-clifford":
            if self.k:
                raise ConfigError("global-clifford carries no magic sites")
        elif self.scheme == "clifford+t":
            if not 1 <= self.k <= self.n:
                raise ConfigError(f"k = {self.k} outside [1, n]")
        else:
            raise ConfigError(f"experiments run global schemes, not {self.scheme!r}")
        specs = self.t_specs or tuple(canonical_tspec(self.d) for _ in range(self.k))
        if len(specs) != self.k or any(sp.d != self.d for sp in specs):
            raise ConfigError(f"need {self.k} magic specs at dimension {self.d}")
        object.__setattr__(self, "t_specs", tuple(specs))
        if self.state not in STATE_FAMILIES:
            raise ConfigError(f"unknown state family {self.state!r}")
        if not 0.0 <= self.depolarize <= 1.0:
            raise ConfigError(f"depolarize = {self.depolarize} outside [0, 1]")
        if self.depolarize and self.state != "depolarized-ghz":
            raise ConfigError("only depolarized-ghz takes a depolarization rate")
        if self.state == "cluster":
            lattice = self.lattice if self.lattice != (0, 0) else (3, 3)
            if lattice[0] * lattice[1] != self.n:
                raise ConfigError(f"lattice {lattice} does not hold {self.n} qudits")
            object.__setattr__(self, "lattice", lattice)
        if self.shots < 1 or self.runs < 1:
            raise ConfigError("shots and runs must be positive")
        if self.groups < 1 or self.shots % self.groups:
            raise ConfigError(f"{self.groups} groups do not tile {self.shots} shots")
        if self.seed is None or self.seed < 0:
            raise ConfigError("experiments need a nonnegative seed")
        if self.workers < 1:
            raise ConfigError("workers must be positive")

    def prep_circuit(self) -> Circuit:
        if self.state == "cluster":
            return cluster_circuit(self.lattice[0], self.lattice[1], self.d)
        return ghz_circuit(self.n, self.d)

    def truth(self) -> float:
        if self.state == "depolarized-ghz":
            return 1.0 - self.depolarize + self.depolarize / self.d ** self.n
        return 1.0

    def theory_bound(self) -> float:
        """Squared shadow norm of the traceless target projector (bound for k >= 1)."""
        hs2 = 1.0 - 1.0 / self.d ** self.n
        if self.k:
            return gamma_tilde(self.d, self.k) * hs2
        return norm_stab_projector(self.n, self.d, 1) * hs2


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    estimates: tuple[float, ...]
    truth: float
    theory_bound: float

    def row(self) -> dict:
        est = np.asarray(self.estimates)
        return {
            "scheme": self.config.scheme,
            "d": self.config.d,
            "n": self.config.n,
            "k": self.config.k,
            "N": self.config.shots,
            "run_count": self.config.runs,
            "estimate_mean": float(est.mean()),
            "mse": float(np.mean((est - self.truth) ** 2)),
            "theory_bound": self.theory_bound,
            "seed": self.config.seed,
        }


def _experiment_labels(config: ExperimentConfig):
    """Preparation label, gadget-layer label, and magic tables on n + k qudits."""
    n, d, k = config.n, config.d, config.k
    total = n + k
    prep = circuit_clifford_label(Circuit(total, d, config.prep_circuit().gates))
    post_gates: list = []
    for j in range(k):
        post_gates += [gate_cx(j, n + j), gate_f(j)]
    post = circuit_clifford_label(Circuit(total, d, tuple(post_gates)))
    tables = np.stack([weyl_expectations(sp) for sp in config.t_specs]) if k \
        else np.zeros((0, d, d), dtype=np.complex128)
    return prep, post, tables


def _run_rng(config: ExperimentConfig, run_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(config.seed).spawn(config.runs)[run_index])


def run_values(config: ExperimentConfig, run_index: int) -> np.ndarray:
    """All per-shot fidelity estimates of one run, via the compiled shot loop."""
    from ._kernels import fidelity_values
    d = config.d
    prep, post, tables = _experiment_labels(config)
    phases = np.exp(2j * np.pi * np.arange(d) / d)
    return fidelity_values(config.n, d, prep.mat, prep.g, post.mat, post.g,
                           tables, phases, float(config.depolarize), config.shots,
                           _run_rng(config, run_index))


def run_values_pure(config: ExperimentConfig, run_index: int) -> np.ndarray:
    """Engine-level twin of run_values; consumes the identical rng stream."""
    n, d = config.n, config.d
    D = d ** n
    target = config.prep_circuit()
    rng = _run_rng(config, run_index)
    vals = np.empty(config.shots)
    for s in range(config.shots):
        noisy = config.depolarize > 0.0 and rng.random() < config.depolarize
        layer = sample_clifford(n, d, rng)
        prep = target
        if noisy:
            prep = basis_circuit(rng.integers(0, d, size=n), n, d)
        circ = gadgetize(prep, ensemble_specs=config.t_specs, clifford=layer)
        x = sample_outcome_sequential(circ, rng)
        if noisy:
            circ = gadgetize(target, ensemble_specs=config.t_specs, clifford=layer)
        vals[s] = (D + 1) * prefix_probability(circ, x) - 1.0
    return vals


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Repeated-run fidelity estimation; deterministic for a fixed seed."""
    method = "mean" if config.groups == 1 else ("median-of-means", config.groups)
    if config.workers == 1:
        batches = [run_values(config, r) for r in range(config.runs)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(lambda r: run_values(config, r), range(config.runs)))
    estimates = tuple(aggregate(vals, method).value for vals in batches)
    return ExperimentResult(config, estimates, config.truth(), config.theory_bound())


# ---------------------------------------------------------------------------
# Result serialization.

CSV_COLUMNS = ("scheme", "d", "n", "k", "N", "run_count",
               "estimate_mean", "mse", "theory_bound", "seed")


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"
