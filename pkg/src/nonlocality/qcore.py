"""Small dense linear algebra for N-qubit states and local dichotomic measurements.

Measurement directions are kept as Bloch vectors. Correlators are obtained by
contracting the state's Pauli tensor ``T[mu_1, ..., mu_N] = Tr(rho sigma_mu_1 x ... x sigma_mu_N)``
party by party, so no ``2**N x 2**N`` operator product is ever formed per sample.

Correlator tensors use one axis per party of length ``m_i + 1``: index 0 means the
party is absent from the term, index ``j + 1`` means setting ``j``.
"""
from __future__ import annotations

import itertools
import re
import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_PARTIES = 6
MAX_SETTINGS = 4
ABSENT = 0

PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class Scenario:
    """Bell scenario ``m_1 x ... x m_N`` with two outcomes per setting."""

    settings: tuple[int, ...]

    def __post_init__(self):
        settings = tuple(int(m) for m in self.settings)
        object.__setattr__(self, "settings", settings)
        if not 2 <= len(settings) <= MAX_PARTIES:
            raise ValueError(f"need 2..{MAX_PARTIES} parties, got {len(settings)}")
        if any(not 1 <= m <= MAX_SETTINGS for m in settings):
            raise ValueError(f"settings per party must be in 1..{MAX_SETTINGS}, got {settings}")

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        if not re.fullmatch(r"\s*\d+(\s*x\s*\d+)+\s*", text):
            raise ValueError(f"cannot parse scenario {text!r}; expected e.g. '2x2x2'")
        return cls(tuple(int(p) for p in text.split("x")))

    @property
    def n_parties(self) -> int:
        return len(self.settings)

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of correlator / coefficient tensors."""
        return tuple(m + 1 for m in self.settings)

    @property
    def dim(self) -> int:
        return 2**self.n_parties

    def __str__(self):
        return "x".join(str(m) for m in self.settings)


@dataclass(frozen=True)
class BlochSetting:
    """Measurement direction in the half-angle convention ``(sin 2phi cos xi, sin 2phi sin xi, cos 2phi)``."""

    phi: float
    xi: float

    @property
    def unit_vector(self) -> np.ndarray:
        return _bloch(np.asarray(self.phi), np.asarray(self.xi))


def _bloch(phi, xi):
    s = np.sin(2 * phi)
    return np.stack([s * np.cos(xi), s * np.sin(xi), np.cos(2 * phi)], axis=-1)


def sample_setting(rng: np.random.Generator) -> BlochSetting:
    """Draw one Haar-random direction: xi uniform on [0, 2pi), phi = arcsin(sqrt(omega)), omega uniform on [0, 1)."""
    xi = 2 * np.pi * rng.random()
    omega = rng.random()
    return BlochSetting(phi=float(np.arcsin(np.sqrt(omega))), xi=float(xi))


def sample_directions(rng: np.random.Generator, size) -> np.ndarray:
    """Vectorized :func:`sample_setting`; returns unit vectors of shape ``size + (3,)``."""
    xi = 2 * np.pi * rng.random(size)
    omega = rng.random(size)
    return _bloch(np.arcsin(np.sqrt(omega)), xi)


def observable(b) -> np.ndarray:
    """Return ``e . sigma`` for a :class:`BlochSetting` or a 3-vector."""
    e = b.unit_vector if isinstance(b, BlochSetting) else np.asarray(b, dtype=float)
    return np.einsum("k,kij->ij", e, PAULIS[1:])


@dataclass(frozen=True)
class SettingsSample:
    """Unit vectors for every party and setting; ``per_party[i]`` has shape ``(m_i, 3)``."""

    per_party: tuple[np.ndarray, ...]

    @property
    def scenario(self) -> Scenario:
        return Scenario(tuple(len(d) for d in self.per_party))

    @classmethod
    def random(cls, scenario: Scenario, rng: np.random.Generator) -> "SettingsSample":
        return cls(tuple(sample_directions(rng, (m,)) for m in scenario.settings))

    @classmethod
    def from_settings(cls, per_party: Sequence[Sequence[BlochSetting]]) -> "SettingsSample":
        return cls(tuple(np.array([b.unit_vector for b in party]) for party in per_party))


@dataclass(frozen=True)
class CorrelationTensor:
    """All joint expectation values for one settings sample."""

    scenario: Scenario
    values: np.ndarray

    def __getitem__(self, term):
        return self.values[term]


@dataclass(frozen=True)
class Behavior:
    """Joint outcome probabilities; ``probs[k_1, ..., k_N, r_1, ..., r_N] = P(r | k)``."""

    scenario: Scenario
    probs: np.ndarray


# ---------------------------------------------------------------------------
# states


def validate_state(psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size < 2 or psi.size & (psi.size - 1):
        raise ValueError("state vector length must be a power of two")
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise ValueError(f"state not normalized (norm {np.linalg.norm(psi)!r})")
    return psi


def n_qubits(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def density_matrix(state: np.ndarray) -> np.ndarray:
    """Projector onto a pure state; density matrices pass through unchanged."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-12, psd_tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    n_qubits(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -psd_tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state of ``n`` qubits (normalized complex Gaussian vector)."""
    return random_pure_states(n, rng, 1)[0]


def random_pure_states(n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one qubit")
    z = rng.standard_normal((size, 2**n)) + 1j * rng.standard_normal((size, 2**n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def mix_with_white_noise(rho: np.ndarray, v: float) -> np.ndarray:
    """``v rho + (1 - v) I / 2**N``."""
    if not 0 <= v <= 1:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    rho = density_matrix(rho)
    d = rho.shape[0]
    return v * rho + (1 - v) * np.eye(d) / d


def product_state(*states: np.ndarray) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for s in states:
        out = np.kron(out, np.asarray(s, dtype=complex))
    return out


# ---------------------------------------------------------------------------
# correlators

# _PAULI_MAP[mu, 2a+b] = sigma_mu[b, a], so that T_mu = sum_ab rho[a, b] sigma_mu[b, a]
_PAULI_MAP = PAULIS.transpose(0, 2, 1).reshape(4, 4)


def pauli_tensor(state: np.ndarray) -> np.ndarray:
    """Real tensor ``T[mu_1..mu_N] = Tr(rho sigma_mu_1 x ... x sigma_mu_N)`` for a state vector or density matrix."""
    rho = density_matrix(state)
    return pauli_tensors(rho[None])[0]


def pauli_tensors(rhos: np.ndarray) -> np.ndarray:
    """Batched :func:`pauli_tensor`. Accepts ``(B, d)`` state vectors or ``(B, d, d)`` density matrices."""
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.ndim == 2:
        rhos = np.einsum("bi,bj->bij", rhos, rhos.conj())
    batch, d = rhos.shape[0], rhos.shape[1]
    n = n_qubits(d)
    # (B, a1..aN, b1..bN) -> (B, a1 b1, a2 b2, ...)
    t = rhos.reshape((batch,) + (2,) * (2 * n))
    order = [0] + [x for i in range(n) for x in (1 + i, 1 + n + i)]
    t = t.transpose(order).reshape((batch,) + (4,) * n)
    for axis in range(1, n + 1):
        t = np.moveaxis(np.tensordot(t, _PAULI_MAP, axes=([axis], [1])), -1, axis)
    return t.real


def _local_maps(directions: np.ndarray) -> np.ndarray:
    """Rows ``(1, 0, 0, 0)`` for the absent index and ``(0, e)`` per setting; shape ``(..., m + 1, 4)``."""
    directions = np.asarray(directions, dtype=float)
    lead = directions.shape[:-2]
    m = directions.shape[-2]
    out = np.zeros(lead + (m + 1, 4))
    out[..., 0, 0] = 1.0
    out[..., 1:, 1:] = directions
    return out


def correlators_from_pauli(t: np.ndarray, directions: Sequence[np.ndarray]) -> np.ndarray:
    """Contract Pauli tensor(s) with batched directions.

    ``t`` is ``(4,)*N`` (shared state) or ``(B,) + (4,)*N`` (one state per sample);
    ``directions[i]`` is ``(B, m_i, 3)``. Returns ``(B, m_1 + 1, ..., m_N + 1)``.
    """
    n = len(directions)
    maps = [_local_maps(d) for d in directions]
    letters = string.ascii_letters
    batched = t.ndim == n + 1
    mus = list(letters[:n])
    js = list(letters[n : 2 * n])
    cur = mus[:]
    out = t
    for i in range(n):
        nxt = cur[:]
        nxt[i] = js[i]
        lhs_t = ("Z" if (batched or i > 0) else "") + "".join(cur)
        spec = f"Z{js[i]}{mus[i]},{lhs_t}->Z{''.join(nxt)}"
        out = np.einsum(spec, maps[i], out, optimize=True)
        cur = nxt
    return out


def correlation_tensor(rho: np.ndarray, s: SettingsSample) -> CorrelationTensor:
    """Every ``Tr(rho T_1 x ... x T_N)`` with ``T_i`` an observable or the identity."""
    t = pauli_tensor(rho)
    if t.ndim != s.scenario.n_parties:
        raise ValueError(f"state has {t.ndim} qubits but settings describe {s.scenario.n_parties} parties")
    values = correlators_from_pauli(t, [d[None] for d in s.per_party])[0]
    values[(ABSENT,) * t.ndim] = 1.0
    return CorrelationTensor(s.scenario, values)


def behavior_from_correlations(t: CorrelationTensor) -> Behavior:
    """Probabilities from the correlator expansion.

    ``P(r | k) = 2**-N sum_S prod_{i in S} (-1)**r_i <prod_{i in S} E^i_{k_i}>`` over all subsets ``S``.
    """
    sc = t.scenario
    n = sc.n_parties
    probs = np.zeros(sc.settings + (2,) * n)
    for k in itertools.product(*(range(m) for m in sc.settings)):
        for subset in itertools.product((0, 1), repeat=n):
            term = tuple(k_i + 1 if s_i else ABSENT for k_i, s_i in zip(k, subset))
            c = t.values[term]
            for r in itertools.product((0, 1), repeat=n):
                sign = (-1) ** sum(r_i for r_i, s_i in zip(r, subset) if s_i)
                probs[k + r] += sign * c
    return Behavior(sc, probs / 2**n)


def behavior_from_born(rho: np.ndarray, s: SettingsSample) -> Behavior:
    """Probabilities ``Tr(rho Pi_1 x ... x Pi_N)`` with projectors ``(I +/- e . sigma) / 2``."""
    rho = density_matrix(rho)
    sc = s.scenario
    n = sc.n_parties
    if rho.shape[0] != sc.dim:
        raise ValueError("state dimension does not match the settings sample")
    proj = [
        [[(np.eye(2) + (-1) ** r * observable(e)) / 2 for r in (0, 1)] for e in dirs]
        for dirs in s.per_party
    ]
    probs = np.zeros(sc.settings + (2,) * n)
    for k in itertools.product(*(range(m) for m in sc.settings)):
        for r in itertools.product((0, 1), repeat=n):
            op = np.array([[1.0 + 0j]])
            for i in range(n):
                op = np.kron(op, proj[i][k[i]][r[i]])
            probs[k + r] = np.trace(rho @ op).real
    return Behavior(sc, probs)


def correlations_from_behavior(b: Behavior) -> CorrelationTensor:
    """Marginal correlators of a (no-signaling) behavior; absent parties are read at setting 0."""
    sc = b.scenario
    n = sc.n_parties
    values = np.zeros(sc.shape)
    signs = np.array([1.0, -1.0])
    for term in itertools.product(*(range(m + 1) for m in sc.settings)):
        k = tuple(j - 1 if j else 0 for j in term)
        p = b.probs[k]
        for i in range(n):
            if term[i]:
                p = np.tensordot(signs, p, axes=([0], [0]))
            else:
                p = p.sum(axis=0)
        values[term] = p
    return CorrelationTensor(sc, values)
