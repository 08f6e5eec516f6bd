"""Magic-gate circuits by reverse gadgetization and post-selected stabilizer sampling.

Every diagonal magic gate on a data qudit is replaced by a CX coupling to a
fresh ancilla that is post-selected on the gate's single-qudit magic state.
The whole circuit then becomes Clifford on n + t qudits, and measurement
outcome probabilities reduce to

    p(x) = d^(xi - m) tr[Pi_gamma (|T+><T+|)^t]   (or 0 when a constrained
                                                   stabilizer phase clashes)

where Pi_gamma is the stabilizer projector that survives on the ancilla
register after constraining the stabilizer group to the observed prefix x.
Outcomes are drawn one qudit at a time from the d conditional probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, Gate, circuit_clifford_label, gate_cx, gate_f, gate_from_label
from .stab import (GeneratingMatrix, apply_clifford, block_cut, block_echelon,
                   zero_state_generating)
from .sympl import CliffordLabel
from .tgate import TGateSpec, weyl_expectations
from .weyl import DimensionMismatch


class TooManyAncillas(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class ZeroPostselection(RuntimeError):
    pass


ANCILLA_CAP = 12


@dataclass(frozen=True)
class GadgetCircuit:
    """Clifford-only circuit on n + t qudits with t post-selected ancillas."""

    n: int
    circuit: Circuit
    postselect: tuple[TGateSpec, ...]

    def __post_init__(self):
        if self.circuit.n != self.n + self.t:
            raise ShapeMismatch(f"{self.circuit.n} qudits for {self.n} data + {self.t} ancillas")
        if self.circuit.t_count != 0:
            raise ShapeMismatch("gadget circuits must be Clifford-only")

    @property
    def t(self) -> int:
        return len(self.postselect)

    @property
    def d(self) -> int:
        return self.circuit.d


def gadgetize(prep: Circuit, ensemble_specs=(), clifford: CliffordLabel | None = None,
              cap: int = ANCILLA_CAP) -> GadgetCircuit:
    """Rewrite prep + random Clifford + magic layer + Fourier layer gadget-free.

    prep may contain magic gates; each one is replaced in place by a CX onto a
    fresh ancilla. The measurement ensemble contributes, per spec j, a gadget
    CX from data qudit j followed by F on that qudit, preserving the
    Clifford -> magic -> Fourier layer order. clifford=None omits the random
    layer (identity).
    """
    n, d = prep.n, prep.d
    specs: list[TGateSpec] = []
    t = prep.t_count + len(ensemble_specs)
    if t > cap:
        raise TooManyAncillas(f"{t} magic gates exceeds the ancilla cap {cap}")
    total = n + t
    gates: list[Gate] = []
    anc = n
    for g in prep.gates:
        if g.kind == "T":
            gates.append(gate_cx(g.sites[0], anc))
            specs.append(g.tspec)
            anc += 1
        else:
            gates.append(g)
    if clifford is not None:
        if clifford.n != n or clifford.d != d:
            raise DimensionMismatch(f"clifford layer acts on {clifford.n} qudits, data has {n}")
        gates.append(gate_from_label(clifford, sites=tuple(range(n))))
    for j, spec in enumerate(ensemble_specs):
        gates.append(gate_cx(j, anc))
        gates.append(gate_f(j))
        specs.append(spec)
        anc += 1
    return GadgetCircuit(n, Circuit(total, d, tuple(gates)), tuple(specs))


def gadget_state(circ: GadgetCircuit) -> GeneratingMatrix:
    """Stabilizer generating matrix of the pre-measurement (n + t)-qudit state."""
    label = circuit_clifford_label(circ.circuit)
    return apply_clifford(zero_state_generating(circ.circuit.n, circ.d), label)


@dataclass(frozen=True)
class ConstraintResult:
    """Outcome of constraining a stabilizer group to an outcome prefix."""

    flag: bool
    xi: int
    g_gamma: GeneratingMatrix


def _cascade(mat: np.ndarray, n_data: int, m: int, d: int) -> tuple[np.ndarray, int, int]:
    """Echelon/cut cascade selecting stabilizers that are Z-type on the measured
    prefix and trivial on the marginalized data qudits.

    Returns (g3, xi, c4): the surviving xi rows (full width, phases not yet
    outcome-shifted) and the row index separating ancilla-supported rows from
    rows that must carry a vanishing phase. Independent of the outcome values,
    so one cascade serves all d extensions of a prefix.
    """
    total = (mat.shape[1] - 1) // 2
    work = mat.copy()
    block_echelon(work, d, "x", cols=(0, n_data))
    c1 = block_cut(work, "x", cols=(0, n_data))
    g1 = work[c1:]
    block_echelon(g1, d, "z", cols=(0, n_data), reverse=True)
    c2 = block_cut(g1, "z", cols=(m, n_data))
    g3 = g1[c2:]
    xi = g3.shape[0]
    block_echelon(g3, d, "x", cols=(n_data, total), reverse=True)
    c3 = block_cut(g3, "x", cols=(n_data, total))
    block_echelon(g3, d, "z", rows=(c3, xi), cols=(n_data, total), reverse=True)
    c4 = block_cut(g3, "z", rows=(c3, xi), cols=(n_data, total))
    return g3, xi, c4


def _shifted_phases(g3: np.ndarray, x: np.ndarray, d: int) -> np.ndarray:
    m = x.size
    return (g3[:, -1] + g3[:, :m] @ x) % d


def constrain_stabilizers(g0: GeneratingMatrix, x, n_data: int) -> ConstraintResult:
    """Constrain the full stabilizer group to prefix outcome x on the data qudits."""
    total = g0.n
    t = total - n_data
    if t < 0 or g0.k != total:
        raise ShapeMismatch(f"need a maximal matrix on at least {n_data} qudits, got {g0.k} rows on {total}")
    x = np.atleast_1d(np.asarray(x, dtype=np.int64)) % g0.d
    if x.size > n_data:
        raise ShapeMismatch(f"prefix of length {x.size} exceeds {n_data} data qudits")
    g3, xi, c4 = _cascade(g0.mat, n_data, x.size, g0.d)
    r = _shifted_phases(g3, x, g0.d)
    flag = not r[c4:].any()
    gamma = np.concatenate(
        [g3[:c4, n_data:total], g3[:c4, total + n_data: 2 * total], r[:c4, None]], axis=1)
    return ConstraintResult(flag, xi, GeneratingMatrix(gamma, g0.d))


@lru_cache(maxsize=None)
def _expectation_table(spec: TGateSpec) -> np.ndarray:
    return weyl_expectations(spec)


def magic_overlap_trace(g_gamma: GeneratingMatrix, specs) -> float:
    """tr[Pi_gamma (|T+><T+|)^t] by enumerating the d^k phased group elements.

    Each group element is scored as a product of cached single-qudit Weyl
    expectation values in the per-spec magic state.
    """
    specs = tuple(specs)
    d, k, t = g_gamma.d, g_gamma.k, g_gamma.n
    if t != len(specs):
        raise ShapeMismatch(f"{t} ancilla qudits but {len(specs)} magic specs")
    if k == 0:
        return 1.0
    tables = [_expectation_table(s) for s in specs]
    gz, gx, r = g_gamma.gz, g_gamma.gx, g_gamma.r
    acc = 0.0 + 0.0j
    coeff = np.zeros(k, dtype=np.int64)
    for flat in range(d ** k):
        c, rem = coeff, flat
        for i in range(k):
            c[i] = rem % d
            rem //= d
        uz, ux = c @ gz % d, c @ gx % d
        val = np.exp(2j * np.pi * (int(c @ r) % d) / d)
        for j in range(t):
            val *= tables[j][uz[j], ux[j]]
        acc += val
    return float(acc.real) / d ** k


def prefix_probability(circ: GadgetCircuit, x, state: GeneratingMatrix | None = None) -> float:
    """p(x) of an outcome prefix on the data qudits, by one full constraint pass."""
    if state is None:
        state = gadget_state(circ)
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    res = constrain_stabilizers(state, x, circ.n)
    if not res.flag:
        return 0.0
    d = circ.d
    return d ** (res.xi - x.size) * magic_overlap_trace(res.g_gamma, circ.postselect)


def outcome_distribution(circ: GadgetCircuit, m: int | None = None) -> np.ndarray:
    """All d^m prefix probabilities, shaped (d,) * m."""
    m = circ.n if m is None else m
    d = circ.d
    state = gadget_state(circ)
    out = np.empty((d,) * m)
    for flat in range(d ** m):
        x = np.array(np.unravel_index(flat, (d,) * m), dtype=np.int64)
        out[tuple(x)] = prefix_probability(circ, x, state=state)
    return out


def sample_outcome_sequential(circ: GadgetCircuit, rng) -> np.ndarray:
    """Draw a full n-dit outcome, one qudit at a time, from the exact chain rule.

    The echelon cascade for prefix length m is shared across the d candidate
    extensions; only the phase shift and the ancilla trace depend on the
    outcome values.
    """
    n, d = circ.n, circ.d
    state = gadget_state(circ)
    total = state.n
    x = np.zeros(0, dtype=np.int64)
    for m in range(1, n + 1):
        g3, xi, c4 = _cascade(state.mat, n, m, d)
        gamma_vecs = np.concatenate(
            [g3[:c4, n:total], g3[:c4, total + n: 2 * total]], axis=1)
        probs = np.zeros(d)
        for y in range(d):
            xy = np.append(x, y)
            r = _shifted_phases(g3, xy, d)
            if r[c4:].any():
                continue
            gamma = GeneratingMatrix(np.hstack([gamma_vecs, r[:c4, None]]), d)
            probs[y] = max(d ** (xi - m) * magic_overlap_trace(gamma, circ.postselect), 0.0)
        tot = probs.sum()
        if tot <= 0.0:
            raise ZeroPostselection(f"all extensions of prefix {x.tolist()} have zero weight")
        draw = rng.random() * tot
        y = d - 1
        acc = 0.0
        for cand in range(d):
            acc += probs[cand]
            if draw < acc:
                y = cand
                break
        x = np.append(x, y)
    return x
