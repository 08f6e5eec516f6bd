"""Circuit containers shared by the stabilizer engine, the gadgetizer, and the dense oracle.

Gates are applied in list order. Clifford kinds are F, S(nu), U(nu), CX, Z, X
plus LABEL (a whole Clifford given by its (M, g) label); T carries a TGateSpec.
Z and X take an integer power so basis preparations stay one gate per site.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field import fe_inv
from .sympl import (CliffordLabel, Transvection, identity_label,
                    transvection_factorization)
from .tgate import TGateSpec
from .weyl import DimensionMismatch


class BadSite(IndexError):
    pass


CLIFFORD_KINDS = ("F", "S", "U", "CX", "Z", "X", "LABEL")


@dataclass(frozen=True)
class Gate:
    kind: str
    sites: tuple[int, ...]
    param: int = 1
    tspec: TGateSpec | None = None
    label: CliffordLabel | None = None


def gate_f(j: int) -> Gate:
    return Gate("F", (j,))


def gate_s(j: int, nu: int) -> Gate:
    return Gate("S", (j,), param=nu)


def gate_u(j: int, nu: int) -> Gate:
    return Gate("U", (j,), param=nu)


def gate_cx(control: int, target: int) -> Gate:
    if control == target:
        raise BadSite("CX needs distinct control and target")
    return Gate("CX", (control, target))


def gate_z(j: int, power: int = 1) -> Gate:
    return Gate("Z", (j,), param=power)


def gate_x(j: int, power: int = 1) -> Gate:
    return Gate("X", (j,), param=power)


def gate_t(j: int, spec: TGateSpec) -> Gate:
    return Gate("T", (j,), tspec=spec)


def gate_from_label(label: CliffordLabel, sites: tuple[int, ...] | None = None) -> Gate:
    if sites is None:
        sites = tuple(range(label.n))
    if len(sites) != label.n or len(set(sites)) != label.n:
        raise BadSite(f"label acts on {label.n} sites, got {sites}")
    return Gate("LABEL", tuple(sites), label=label)


@dataclass(frozen=True)
class Circuit:
    n: int
    d: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        for g in self.gates:
            _validate_gate(g, self.n, self.d)

    def __add__(self, other: "Circuit") -> "Circuit":
        if (self.n, self.d) != (other.n, other.d):
            raise DimensionMismatch("circuits act on different systems")
        return Circuit(self.n, self.d, self.gates + other.gates)

    @property
    def t_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == "T")


def _validate_gate(g: Gate, n: int, d: int) -> None:
    if any(not 0 <= j < n for j in g.sites):
        raise BadSite(f"gate {g.kind} on sites {g.sites} outside 0..{n - 1}")
    if g.kind in ("S", "U") and g.param % d == 0:
        raise BadSite(f"{g.kind} needs a nonzero field parameter")
    if g.kind == "T" and (g.tspec is None or g.tspec.d != d):
        raise BadSite("T gate needs a spec matching the qudit dimension")
    if g.kind == "LABEL" and (g.label is None or g.label.d != d or g.label.n != len(g.sites)):
        raise BadSite("label gate does not match its sites")


def _embed_label(label: CliffordLabel, sites: tuple[int, ...], n: int) -> CliffordLabel:
    idx = list(sites) + [n + j for j in sites]
    mat = np.eye(2 * n, dtype=np.int64)
    mat[np.ix_(idx, idx)] = label.mat
    g = np.zeros(2 * n, dtype=np.int64)
    g[idx] = label.g
    return CliffordLabel(mat, g, label.d)


def gate_clifford_label(g: Gate, n: int, d: int) -> CliffordLabel:
    """(M, g) label of one Clifford gate on n qudits."""
    _validate_gate(g, n, d)
    if g.kind == "T":
        raise ValueError("magic gates have no Clifford label")
    if g.kind == "LABEL":
        return _embed_label(g.label, g.sites, n)
    mat = np.eye(2 * n, dtype=np.int64)
    vec = np.zeros(2 * n, dtype=np.int64)
    if g.kind == "F":
        j = g.sites[0]
        mat[j, j] = 0
        mat[j, n + j] = 1
        mat[n + j, j] = -1 % d
        mat[n + j, n + j] = 0
    elif g.kind == "S":
        j = g.sites[0]
        mat[j, n + j] = g.param % d
    elif g.kind == "U":
        j = g.sites[0]
        mat[j, j] = fe_inv(g.param, d)
        mat[n + j, n + j] = g.param % d
    elif g.kind == "CX":
        c, t = g.sites
        mat[c, t] = -1 % d
        mat[n + t, n + c] = 1
    elif g.kind == "Z":
        vec[g.sites[0]] = g.param % d
    elif g.kind == "X":
        vec[n + g.sites[0]] = g.param % d
    else:
        raise ValueError(f"unknown gate kind {g.kind}")
    return CliffordLabel(mat, vec, d)


def circuit_clifford_label(circ: Circuit) -> CliffordLabel:
    """Compose all gates of a magic-free circuit into one label."""
    lab = identity_label(circ.n, circ.d)
    for g in circ.gates:
        lab = gate_clifford_label(g, circ.n, circ.d).compose(lab)
    return lab


def invert_gates(gates, d: int) -> list[Gate]:
    """Word for the inverse of a magic-free gate word."""
    out = []
    for g in reversed(gates):
        if g.kind == "F":
            out.extend([g, g, g])
        elif g.kind == "S":
            out.append(gate_s(g.sites[0], (-g.param) % d))
        elif g.kind == "U":
            out.append(gate_u(g.sites[0], fe_inv(g.param, d)))
        elif g.kind == "CX":
            out.extend([g] * (d - 1))
        elif g.kind == "Z":
            out.append(gate_z(g.sites[0], (-g.param) % d))
        elif g.kind == "X":
            out.append(gate_x(g.sites[0], (-g.param) % d))
        else:
            raise ValueError(f"cannot invert gate kind {g.kind}")
    return out


def _transvection_word(t: Transvection, n: int, d: int) -> list[Gate]:
    """Named gates realizing mu of one transvection.

    Conjugates the single-site phase gate S(-lam) by a word mapping the
    direction h to e_z at h's first supported site.
    """
    h = np.asarray(t.h, dtype=np.int64) % d
    lam = t.lam % d
    if lam == 0 or not h.any():
        return []
    support = [j for j in range(n) if h[j] != 0 or h[n + j] != 0]
    to_ez: list[Gate] = []
    for j in support:
        a, b = int(h[j]), int(h[n + j])
        if b != 0:
            if a != 0:
                to_ez.append(gate_s(j, (-a * fe_inv(b, d)) % d))
            to_ez.append(gate_f(j))
            to_ez.append(gate_u(j, b))
        elif a != 1:
            to_ez.append(gate_u(j, a))
    s0 = support[0]
    for j in support[1:]:
        to_ez.append(gate_cx(j, s0))
    core = gate_s(s0, (-lam) % d)
    return to_ez + [core] + invert_gates(to_ez, d)


def label_word(label: CliffordLabel) -> list[Gate]:
    """Named-gate word realizing the label up to a global phase.

    The symplectic part is factored into transvections pair by pair; the Weyl
    part becomes Z and X powers.
    """
    n, d = label.n, label.d
    word: list[Gate] = []
    stages = transvection_factorization(label.mat, d)
    for ts in reversed(stages):
        for t in ts:
            word.extend(_transvection_word(t, n, d))
    for j in range(n):
        if label.g[n + j]:
            word.append(gate_x(j, int(label.g[n + j])))
        if label.g[j]:
            word.append(gate_z(j, int(label.g[j])))
    return word


def ghz_circuit(n: int, d: int) -> Circuit:
    """Prepares sum_b |b..b> / sqrt(d) from |0..0>."""
    gates = [gate_f(0)] + [gate_cx(j, j + 1) for j in range(n - 1)]
    return Circuit(n, d, tuple(gates))


def cz_gates(i: int, j: int) -> list[Gate]:
    """CZ via CX conjugated by Fourier on the target."""
    return [gate_f(j), gate_f(j), gate_f(j), gate_cx(i, j), gate_f(j)]


def cluster_circuit(rows: int, cols: int, d: int, periodic: bool = True) -> Circuit:
    """Cluster state on a rows x cols lattice: plus states entangled by CZ on edges."""
    n = rows * cols
    site = lambda r, c: (r % rows) * cols + (c % cols)
    gates = [gate_f(j) for j in range(n)]
    edges = set()
    for r in range(rows):
        for c in range(cols):
            if cols > 1 and (periodic or c + 1 < cols):
                edges.add(tuple(sorted((site(r, c), site(r, c + 1)))))
            if rows > 1 and (periodic or r + 1 < rows):
                edges.add(tuple(sorted((site(r, c), site(r + 1, c)))))
    for i, j in sorted(edges):
        gates.extend(cz_gates(i, j))
    return Circuit(n, d, tuple(gates))


def basis_circuit(x, n: int, d: int) -> Circuit:
    """Prepares |x> from |0..0>."""
    x = np.asarray(x, dtype=np.int64) % d
    gates = [gate_x(j, int(x[j])) for j in range(n) if x[j]]
    return Circuit(n, d, tuple(gates))
