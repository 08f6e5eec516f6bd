"""Brute-force complex-vector oracle: exact states, moments, and shadow norms at desk scale.

Basis ordering is big-endian: site 0 is the most significant digit of the flat
index. Clifford label gates are decomposed into named-gate words, so the
metaplectic representation itself is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from itertools import product

from .circuit import Circuit, Gate, label_word
from .field import fe_inv, primitive_element
from .stab import GeneratingMatrix, LagrangianState
from .tgate import TGateSpec, magic_state, t_diagonal, weyl_expectations
from .weyl import DimensionMismatch, as_vector, symplectic_product, weight_profile

MOMENT_CAP = 3 ** 9
ENUM_CAP = 125
PAIR_CAP = 2500


class TooLarge(ValueError):
    pass


class NotTraceless(ValueError):
    pass


class ZeroPostselectionWeight(ValueError):
    pass


@dataclass(frozen=True)
class DenseState:
    amps: np.ndarray
    n: int
    d: int

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.d ** self.n,):
            raise DimensionMismatch(f"expected {self.d ** self.n} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amps", amps)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((self.d,) * self.n)


def zero_state(n: int, d: int) -> DenseState:
    amps = np.zeros(d ** n, dtype=np.complex128)
    amps[0] = 1.0
    return DenseState(amps, n, d)


def basis_state(x, n: int, d: int) -> DenseState:
    x = np.asarray(x, dtype=np.int64) % d
    amps = np.zeros(d ** n, dtype=np.complex128)
    amps[np.ravel_multi_index(tuple(x), (d,) * n)] = 1.0
    return DenseState(amps, n, d)


def _chi(r, d: int) -> np.ndarray:
    return np.exp(2j * np.pi * (np.asarray(r) % d) / d)


def fourier_matrix(d: int) -> np.ndarray:
    a = np.arange(d)
    return _chi(np.outer(a, a), d) / np.sqrt(d)


def _apply_axis_matrix(t: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, t, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_axis_diag(t: np.ndarray, diag: np.ndarray, axis: int) -> np.ndarray:
    shape = [1] * t.ndim
    shape[axis] = diag.size
    return t * diag.reshape(shape)


def _apply_axis_perm(t: np.ndarray, src: np.ndarray, axis: int) -> np.ndarray:
    """new[a] = old[src[a]] along the axis."""
    return np.take(t, src, axis=axis)


def apply_gate(g: Gate, psi: DenseState) -> DenseState:
    n, d = psi.n, psi.d
    t = psi.tensor()
    if g.kind == "F":
        t = _apply_axis_matrix(t, fourier_matrix(d), g.sites[0])
    elif g.kind == "S":
        a = np.arange(d)
        hf = (d + 1) // 2
        t = _apply_axis_diag(t, _chi(hf * g.param * a * a, d), g.sites[0])
    elif g.kind == "U":
        a = np.arange(d)
        src = fe_inv(g.param, d) * a % d
        t = _apply_axis_perm(t, src, g.sites[0])
    elif g.kind == "CX":
        c, ax = g.sites
        t = t.copy()
        sl = [slice(None)] * n
        for a in range(1, d):
            sl[c] = a
            t[tuple(sl)] = np.roll(t[tuple(sl)], a, axis=ax if ax < c else ax - 1)
    elif g.kind == "Z":
        a = np.arange(d)
        t = _apply_axis_diag(t, _chi(g.param * a, d), g.sites[0])
    elif g.kind == "X":
        t = np.roll(t, g.param, axis=g.sites[0])
    elif g.kind == "T":
        t = _apply_axis_diag(t, t_diagonal(g.tspec), g.sites[0])
    elif g.kind == "LABEL":
        out = psi
        for w in label_word(g.label):
            out = apply_gate(Gate(w.kind, tuple(g.sites[j] for j in w.sites),
                                  w.param, w.tspec, w.label), out)
        return out
    else:
        raise ValueError(f"unknown gate kind {g.kind}")
    return DenseState(t.reshape(-1), n, d)


def dense_apply(circ: Circuit, psi: DenseState | None = None) -> DenseState:
    if psi is None:
        psi = zero_state(circ.n, circ.d)
    if (psi.n, psi.d) != (circ.n, circ.d):
        raise DimensionMismatch("state and circuit act on different systems")
    for g in circ.gates:
        psi = apply_gate(g, psi)
    return psi


def weyl_matrix(u, d: int) -> np.ndarray:
    """Dense W_u as a kron over sites of chi(pc + pq/2)|c+q><c|."""
    u = as_vector(u) % d
    n = u.size // 2
    hf = (d + 1) // 2
    out = np.ones((1, 1), dtype=np.complex128)
    for j in range(n):
        p, q = int(u[j]), int(u[n + j])
        c = np.arange(d)
        w = np.zeros((d, d), dtype=np.complex128)
        w[(c + q) % d, c] = _chi(p * c + hf * p * q, d)
        out = np.kron(out, w)
    return out


# ---------------------------------------------------------------------------
# Stabilizer-state enumeration and Clifford orbits (BFS over canonical keys).

def _canonical_key(amps: np.ndarray) -> bytes:
    idx = np.argmax(np.abs(amps) > 1e-8)
    v = amps / amps[idx]
    v = v / np.linalg.norm(v)
    return (np.round(v, 9) + 0.0).tobytes()


def _generator_gates(n: int, d: int) -> list[Gate]:
    from .circuit import gate_cx, gate_f, gate_s, gate_u, gate_x, gate_z
    nu = primitive_element(d)
    gates = []
    for j in range(n):
        gates += [gate_f(j), gate_s(j, 1), gate_u(j, nu), gate_z(j), gate_x(j)]
    for i in range(n):
        for j in range(n):
            if i != j:
                gates.append(gate_cx(i, j))
    return gates


def clifford_orbit(seed: DenseState) -> list[np.ndarray]:
    """BFS closure of the seed state under the Clifford generator gates, up to phase."""
    n, d = seed.n, seed.d
    gates = _generator_gates(n, d)
    start = seed.amps / np.linalg.norm(seed.amps)
    seen = {_canonical_key(start)}
    frontier = [start]
    out = [start]
    while frontier:
        nxt = []
        for amps in frontier:
            st = DenseState(amps, n, d)
            for g in gates:
                new = apply_gate(g, st).amps
                key = _canonical_key(new)
                if key not in seen:
                    seen.add(key)
                    idx = np.argmax(np.abs(new) > 1e-8)
                    new = new / new[idx]
                    new = new / np.linalg.norm(new)
                    nxt.append(new)
                    out.append(new)
        frontier = nxt
    return out


def stab_state_count(n: int, d: int) -> int:
    count = d ** n
    for k in range(1, n + 1):
        count *= d ** k + 1
    return count


def enumerate_stab_states(n: int, d: int) -> list[np.ndarray]:
    """All n-qudit stabilizer states (one representative per ray)."""
    if d ** n > ENUM_CAP:
        raise TooLarge(f"d^n = {d ** n} exceeds the enumeration bound {ENUM_CAP}")
    states = clifford_orbit(zero_state(n, d))
    expected = stab_state_count(n, d)
    if len(states) != expected:
        raise RuntimeError(f"orbit closure found {len(states)} states, expected {expected}")
    return states


# ---------------------------------------------------------------------------
# Moment operators and exact shadow norms.

@dataclass(frozen=True)
class MomentOperator:
    q: np.ndarray
    normalized: bool
    n: int
    d: int


def moment_operator(ensemble: str, n: int, d: int, seed: DenseState | None = None,
                    states: list[np.ndarray] | None = None,
                    normalized: bool = False) -> MomentOperator:
    """Third moment E |psi><psi|^{x3} over an ensemble of pure states.

    ensemble is one of 'stab-orbit', 'clifford-orbit' (of the seed state), or
    'state-list'. The normalized flag rescales by D(D+1)(D+2)/6.
    """
    D = d ** n
    if D ** 3 > MOMENT_CAP:
        raise TooLarge(f"D^3 = {D ** 3} exceeds the moment bound {MOMENT_CAP}")
    if ensemble == "stab-orbit":
        states = enumerate_stab_states(n, d)
    elif ensemble == "clifford-orbit":
        if seed is None:
            raise ValueError("clifford-orbit needs a seed state")
        states = clifford_orbit(seed)
    elif ensemble != "state-list":
        raise ValueError(f"unknown ensemble {ensemble}")
    if not states:
        raise ValueError("empty state list")
    q = np.zeros((D ** 3, D ** 3), dtype=np.complex128)
    for psi in states:
        phi = np.kron(np.kron(psi, psi), psi)
        q += np.outer(phi, phi.conj())
    q /= len(states)
    if normalized:
        q *= D * (D + 1) * (D + 2) / 6
    return MomentOperator(q, normalized, n, d)


def moment_register_trace(mom: MomentOperator, obs: np.ndarray) -> np.ndarray:
    """tr_BC[Q (I x O x O^dagger)] as a D x D matrix."""
    D = mom.d ** mom.n
    q6 = mom.q.reshape((D,) * 6)
    return np.einsum("abcxyz,yb,zc->ax", q6, obs, obs.conj().T, optimize=True)


def shadow_norm_exact(obs: np.ndarray, mom: MomentOperator) -> float:
    """Squared shadow norm of a traceless observable from the moment operator."""
    D = mom.d ** mom.n
    obs = np.asarray(obs, dtype=np.complex128)
    if obs.shape != (D, D):
        raise DimensionMismatch(f"observable shape {obs.shape} does not match D = {D}")
    if abs(np.trace(obs)) > 1e-10:
        raise NotTraceless(f"trace {np.trace(obs)} exceeds 1e-10")
    x = moment_register_trace(mom, obs)
    norm = float(np.max(np.abs(np.linalg.eigvalsh((x + x.conj().T) / 2))))
    if mom.normalized:
        return 6 * (D + 1) / (D + 2) * norm
    return D * (D + 1) ** 2 * norm


# ---------------------------------------------------------------------------
# Outcome distributions with magic-state postselection.

def dense_outcome_distribution(circ: Circuit, n_data: int,
                               post_specs: tuple[TGateSpec, ...] = (),
                               m: int | None = None) -> np.ndarray:
    """Exact Born probabilities of the first m data qudits.

    The circuit acts on n_data + len(post_specs) qudits; the trailing qudits
    are projected onto the magic states of post_specs and the distribution is
    rescaled by d^t, matching the reversed-gadget convention.
    """
    d = circ.d
    t = len(post_specs)
    if circ.n != n_data + t:
        raise DimensionMismatch(f"circuit has {circ.n} qudits, expected {n_data + t}")
    if d ** circ.n > 5 ** 6:
        raise TooLarge(f"dense dimension {d ** circ.n} exceeds 5^6")
    if m is None:
        m = n_data
    amp = dense_apply(circ).tensor()
    for spec in reversed(post_specs):
        amp = np.tensordot(amp, np.conj(magic_state(spec)), axes=([amp.ndim - 1], [0]))
    probs = np.abs(amp) ** 2 * d ** t
    if t and probs.sum() < 1e-12:
        raise ZeroPostselectionWeight("all postselected amplitudes vanish")
    axes = tuple(range(m, n_data))
    if axes:
        probs = probs.sum(axis=axes)
    return probs.reshape(-1)


# ---------------------------------------------------------------------------
# Third-moment identity for products of single-qudit stabilizer states.

def generating_projector(g: GeneratingMatrix) -> np.ndarray:
    """Dense stabilizer projector d^-k sum of the phased group of g."""
    n, d, k = g.n, g.d, g.k
    D = d ** n
    if D > 250:
        raise TooLarge(f"projector on {n} qudits of dimension {d} exceeds the cap")
    acc = np.zeros((D, D), dtype=np.complex128)
    for c in product(range(d), repeat=k):
        cv = np.asarray(c, dtype=np.int64)
        u = cv @ g.vectors % d
        acc += np.exp(2j * np.pi * (int(cv @ g.r) % d) / d) * weyl_matrix(u, d)
    return acc / d ** k


def lagrangian_projector(state: LagrangianState) -> np.ndarray:
    """Dense rank-1 projector d^-n sum_{u in L} chi([m, u]) W_u."""
    n, d = state.n, state.d
    D = d ** n
    if D > 250:
        raise TooLarge(f"projector on {n} qudits of dimension {d} exceeds the cap")
    rm = np.array([symplectic_product(state.m, b, d) for b in state.basis], dtype=np.int64)
    acc = np.zeros((D, D), dtype=np.complex128)
    for c in product(range(d), repeat=n):
        cv = np.asarray(c, dtype=np.int64)
        u = cv @ state.basis % d
        acc += np.exp(2j * np.pi * (int(cv @ rm) % d) / d) * weyl_matrix(u, d)
    return acc / D


def random_traceless_observable(n: int, d: int, rng: np.random.Generator,
                                diagonal: bool = False) -> np.ndarray:
    """Gaussian Hermitian traceless observable, Hilbert-Schmidt normalized."""
    D = d ** n
    if diagonal:
        a = rng.standard_normal(D)
        m = np.diag(a - a.mean()).astype(np.complex128)
    else:
        a = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
        m = (a + a.conj().T) / 2
        m -= np.trace(m).real / D * np.eye(D)
    return m / np.linalg.norm(m)


# ---------------------------------------------------------------------------
# Shadow norms from symplectic pair-orbit averages.
#
# Conjugating a seed state by a uniformly random Clifford and taking the third
# moment leaves one coefficient per ordered pair (u, v) of phase-space points,
# and that coefficient is constant on orbits of the symplectic group acting on
# pairs. Averaging per orbit class replaces the group average, so the norm
# computation only ever touches D x D matrices.

@dataclass(frozen=True)
class OrbitTables:
    cls: np.ndarray
    neg: np.ndarray
    rows: np.ndarray
    chis: np.ndarray
    n: int
    d: int


def _symplectic_vectors(n: int, d: int) -> np.ndarray:
    k = d ** (2 * n)
    if k > PAIR_CAP:
        raise TooLarge(f"d^2n = {k} exceeds the pair-orbit bound {PAIR_CAP}")
    return np.stack(np.unravel_index(np.arange(k), (d,) * (2 * n)), axis=1).astype(np.int64)


def orbit_tables(n: int, d: int) -> OrbitTables:
    """Classify ordered pairs of phase-space points by symplectic orbit.

    The 2d+2 classes are: both zero, first zero, second zero, v = c u for each
    nonzero scalar c, and independent pairs split by the symplectic product.
    neg[i, j] is the flat index of -(u_i + u_j); rows and chis give the dense
    Weyl entries column-wise, W_u[rows[u, c], c] = chis[u, c].
    """
    vecs = _symplectic_vectors(n, d)
    k = vecs.shape[0]
    shape = (d,) * (2 * n)
    prods = (vecs[:, :n] @ vecs[:, n:].T - vecs[:, n:] @ vecs[:, :n].T) % d
    cls = (2 + d + prods).astype(np.int8)
    nz = np.flatnonzero(vecs.any(axis=1))
    for c in range(1, d):
        scaled = np.ravel_multi_index(tuple((c * vecs[nz]).T % d), shape)
        cls[nz, scaled] = 2 + c
    cls[0, :] = 1
    cls[:, 0] = 2
    cls[0, 0] = 0
    neg = np.empty((k, k), dtype=np.int32)
    for i in range(k):
        neg[i] = np.ravel_multi_index(tuple((-(vecs + vecs[i])).T % d), shape)
    D = d ** n
    cdig = np.stack(np.unravel_index(np.arange(D), (d,) * n), axis=1).astype(np.int64)
    p, q = vecs[:, :n], vecs[:, n:]
    rows = np.empty((k, D), dtype=np.int32)
    for i in range(k):
        rows[i] = np.ravel_multi_index(tuple(((cdig + q[i]) % d).T), (d,) * n)
    hf = (d + 1) // 2
    chis = _chi(cdig @ p.T + hf * (p * q).sum(axis=1)[None, :], d).T
    return OrbitTables(cls, neg, rows, chis, n, d)


def _seed_site_tables(n: int, d: int, specs: tuple[TGateSpec, ...]) -> list[np.ndarray]:
    if len(specs) > n:
        raise DimensionMismatch(f"{len(specs)} magic sites on {n} qudits")
    if any(sp.d != d for sp in specs):
        raise DimensionMismatch("magic-site dimension does not match d")
    zero = np.zeros((d, d), dtype=np.complex128)
    zero[:, 0] = 1.0
    return [weyl_expectations(sp) for sp in specs] + [zero] * (n - len(specs))


def orbit_moment_coefficients(tabs: OrbitTables,
                              specs: tuple[TGateSpec, ...] = ()) -> np.ndarray:
    """Class averages of conj(phi(u) phi(v) phi(-u-v)) over the seed's orbit.

    phi is the Weyl spectrum of the seed state: magic sites from specs first,
    |0> on the remaining sites.
    """
    n, d = tabs.n, tabs.d
    vecs = _symplectic_vectors(n, d)
    phi = np.ones(vecs.shape[0], dtype=np.complex128)
    for j, table in enumerate(_seed_site_tables(n, d, specs)):
        phi = phi * table[vecs[:, j], vecs[:, n + j]]
    nc = 2 * d + 2
    counts = np.zeros(nc, dtype=np.int64)
    sums = np.zeros(nc, dtype=np.complex128)
    for lo in range(0, vecs.shape[0], 256):
        sl = slice(lo, lo + 256)
        w = np.conj(phi[sl, None] * phi[None, :] * phi[tabs.neg[sl]])
        labels = tabs.cls[sl].astype(np.int64).ravel()
        counts += np.bincount(labels, minlength=nc)
        sums += (np.bincount(labels, weights=w.real.ravel(), minlength=nc)
                 + 1j * np.bincount(labels, weights=w.imag.ravel(), minlength=nc))
    return np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)


def shadow_norm_orbit(obs: np.ndarray, tabs: OrbitTables,
                      specs: tuple[TGateSpec, ...] = (),
                      coeffs: np.ndarray | None = None) -> float:
    """Squared shadow norm of a traceless observable via pair-orbit averaging.

    Agrees with shadow_norm_exact on the matching ensemble but scales to
    system sizes where the dense third moment does not fit.
    """
    n, d = tabs.n, tabs.d
    D = d ** n
    obs = np.asarray(obs, dtype=np.complex128)
    if obs.shape != (D, D):
        raise DimensionMismatch(f"observable shape {obs.shape} does not match D = {D}")
    if abs(np.trace(obs)) > 1e-10:
        raise NotTraceless(f"trace {np.trace(obs)} exceeds 1e-10")
    if coeffs is None:
        coeffs = orbit_moment_coefficients(tabs, specs)
    cols = np.arange(D)[None, :]
    beta = (tabs.chis * obs[cols, tabs.rows]).sum(axis=1)
    k = beta.size
    t = np.empty(k, dtype=np.complex128)
    for lo in range(0, k, 256):
        sl = slice(lo, lo + 256)
        t[sl] = (coeffs[tabs.cls[sl]] * beta[None, :] * beta[tabs.neg[sl]]).sum(axis=1)
    x = np.zeros((D, D), dtype=np.complex128)
    np.add.at(x, (tabs.rows, np.broadcast_to(cols, tabs.rows.shape)), t[:, None] * tabs.chis)
    x /= D ** 3
    return D * (D + 1) ** 2 * float(np.max(np.abs(np.linalg.eigvalsh((x + x.conj().T) / 2))))


def orbit_moment_operator(tabs: OrbitTables,
                          specs: tuple[TGateSpec, ...] = ()) -> MomentOperator:
    """Dense third moment reassembled from the class-averaged coefficients."""
    n, d = tabs.n, tabs.d
    if n > 1 or d ** (3 * n) > MOMENT_CAP:
        raise TooLarge("dense reassembly is exhaustive; capped at n = 1")
    coeffs = orbit_moment_coefficients(tabs, specs)
    vecs = _symplectic_vectors(n, d)
    k = vecs.shape[0]
    mats = [weyl_matrix(vecs[i], d) for i in range(k)]
    D = d ** n
    q = np.zeros((D ** 3, D ** 3), dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            q += coeffs[tabs.cls[i, j]] * np.kron(np.kron(mats[i], mats[j]), mats[int(tabs.neg[i, j])])
    return MomentOperator(q / D ** 3, False, n, d)


def weyl_third_moment_residual(n: int, d: int, u, v) -> float:
    """Operator-norm gap between the product-ensemble third moment and its closed form.

    The ensemble is the uniform product of single-qudit stabilizer states; the
    closed form is d^{-n} (d+1)^{-|u or v|} W_{u-v} when u and v are site-wise
    dependent, zero otherwise.
    """
    if n > 2 or d > 5:
        raise TooLarge("exhaustive product enumeration is capped at n <= 2, d <= 5")
    u, v = as_vector(u) % d, as_vector(v) % d
    singles = enumerate_stab_states(1, d)
    states = singles
    for _ in range(n - 1):
        states = [np.kron(a, b) for a in states for b in singles]
    D = d ** n
    wu, wv = weyl_matrix(u, d), weyl_matrix(v, d)
    acc = np.zeros((D, D), dtype=np.complex128)
    for psi in states:
        acc += np.outer(psi, psi.conj()) * (psi.conj() @ wu @ psi) * np.conj(psi.conj() @ wv @ psi)
    acc /= len(states)
    prof = weight_profile(u, v, d)
    if prof.loc_commute:
        target = weyl_matrix((u - v) % d, d) / (d ** n * (d + 1) ** prof.join)
    else:
        target = np.zeros((D, D), dtype=np.complex128)
    return float(np.linalg.norm(acc - target, ord=2))
