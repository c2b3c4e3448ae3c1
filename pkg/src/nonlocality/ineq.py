"""Bell inequalities in correlator form, their symmetry orbits and evaluation.

An inequality is a coefficient tensor ``w`` of the scenario's correlator shape and
reads ``sum_t w_t C_t <= 0``; the constant (all-absent) entry carries the folded
local bound.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .qcore import ABSENT, CorrelationTensor, Scenario

VIOLATION_EPS = 1e-9

_PARTY_LETTERS = "ABCDEF"
_TERM_RE = re.compile(r"([+-]?)\s*(\d*)\s*((?:[A-F]\d)*)")


@dataclass(frozen=True, eq=False)
class BellInequality:
    scenario: Scenario
    coeffs: np.ndarray
    name: str = ""

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.shape != self.scenario.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} does not match scenario {self.scenario}")
        if not np.any(coeffs.reshape(-1)[1:]):
            raise ValueError("inequality has no non-constant term")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def constant(self):
        return self.coeffs[(ABSENT,) * self.scenario.n_parties]

    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        """Sparse view: term index -> coefficient, constant included."""
        return {tuple(int(i) for i in idx): self.coeffs[tuple(idx)].item() for idx in np.argwhere(self.coeffs)}

    def key(self) -> bytes:
        return np.ascontiguousarray(self.coeffs, dtype=np.int64).tobytes() if _is_integral(self.coeffs) else self.coeffs.tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, BellInequality)
            and self.scenario == other.scenario
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.scenario, self.key()))

    def used_settings(self) -> list[list[int]]:
        """Per party, the settings that appear in at least one term."""
        out = []
        for axis in range(self.scenario.n_parties):
            moved = np.moveaxis(self.coeffs, axis, 0)
            out.append([j - 1 for j in range(1, moved.shape[0]) if np.any(moved[j])])
        return out

    def compressed(self) -> "BellInequality":
        """Drop unused settings so that every party's settings are contiguous."""
        used = self.used_settings()
        idx = [[0] + [j + 1 for j in u] for u in used]
        coeffs = self.coeffs[np.ix_(*idx)]
        settings = tuple(max(len(u), 1) for u in used)
        if coeffs.shape != tuple(m + 1 for m in settings):
            pad = [(0, m + 1 - s) for m, s in zip(settings, coeffs.shape)]
            coeffs = np.pad(coeffs, pad)
        return BellInequality(Scenario(settings), coeffs, self.name)

    def to_string(self) -> str:
        parts = []
        for term, c in sorted(self.terms.items(), key=lambda kv: _term_sort_key(kv[0])):
            label = "".join(f"{_PARTY_LETTERS[i]}{j - 1}" for i, j in enumerate(term) if j)
            if not label:
                continue
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag:g}"
            parts.append(("- " if c < 0 else "+ ") + coef + label)
        c0 = self.constant.item()
        if c0:
            parts.append(("- " if c0 < 0 else "+ ") + f"{abs(c0):g}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


def _term_sort_key(term):
    return (sum(1 for j in term if j), tuple(j if j else 99 for j in term))


def _is_integral(a: np.ndarray) -> bool:
    return np.issubdtype(a.dtype, np.integer) or bool(np.all(a == np.round(a)))


def parse_inequality(expr: str, scenario: Optional[Scenario] = None, name: str = "") -> BellInequality:
    """Parse ``"A0B1 - 2A1B1C0 + C0 - 3"``-style expressions (party letters A-F, zero-based settings).

    The result reads ``expr <= 0``. When ``scenario`` is omitted the smallest one
    containing every written setting is used.
    """
    terms: dict[tuple[tuple[int, int], ...], int] = {}
    n_parties = 0
    compact = expr.replace(" ", "")
    pos = 0
    while pos < len(compact):
        m = _TERM_RE.match(compact, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse inequality near {compact[pos:]!r}")
        sign, num, body = m.groups()
        if not num and not body:
            raise ValueError(f"empty term near {compact[pos:]!r}")
        coef = (-1 if sign == "-" else 1) * (int(num) if num else 1)
        factors = tuple((_PARTY_LETTERS.index(body[i]), int(body[i + 1])) for i in range(0, len(body), 2))
        parties = [p for p, _ in factors]
        if len(set(parties)) != len(parties):
            raise ValueError(f"party repeated in term {body!r}")
        if factors:
            n_parties = max(n_parties, max(parties) + 1)
        key = tuple(sorted(factors))
        terms[key] = terms.get(key, 0) + coef
        pos = m.end()
    if scenario is None:
        settings = [1] * max(n_parties, 2)
        for key in terms:
            for p, j in key:
                settings[p] = max(settings[p], j + 1)
        scenario = Scenario(tuple(settings))
    coeffs = np.zeros(scenario.shape, dtype=np.int64)
    for key, c in terms.items():
        idx = [ABSENT] * scenario.n_parties
        for p, j in key:
            if p >= scenario.n_parties or j >= scenario.settings[p]:
                raise ValueError(f"term {key} does not fit scenario {scenario}")
            idx[p] = j + 1
        coeffs[tuple(idx)] += c
    return BellInequality(scenario, coeffs, name)


@dataclass(frozen=True, eq=False)
class InequalityFamily:
    """Deduplicated variants of one inequality class within a fixed scenario, in generation order."""

    scenario: Scenario
    coeffs: np.ndarray  # (V,) + scenario.shape
    name: str = ""
    mode: str = ""
    _matrix: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, i) -> BellInequality:
        return BellInequality(self.scenario, self.coeffs[i], f"{self.name}[{i}]")

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def matrix(self) -> np.ndarray:
        """Float ``(V, P)`` view for batched evaluation."""
        if "m" not in self._matrix:
            self._matrix["m"] = self.coeffs.reshape(len(self), -1).astype(float)
        return self._matrix["m"]

    @property
    def constants(self) -> np.ndarray:
        return self.matrix[:, 0]

    def contains(self, ineq: BellInequality) -> bool:
        flat = self.coeffs.reshape(len(self), -1)
        return bool(np.any(np.all(flat == ineq.coeffs.reshape(-1), axis=1)))

    @classmethod
    def union(cls, families: Iterable["InequalityFamily"], name: str = "") -> "InequalityFamily":
        families = list(families)
        scenario = families[0].scenario
        if any(f.scenario != scenario for f in families):
            raise ValueError("families live in different scenarios")
        stacked = np.concatenate([f.coeffs.astype(np.int64) for f in families])
        return cls(scenario, _dedup(stacked), name or "+".join(f.name for f in families), "union")


def _dedup(stack: np.ndarray) -> np.ndarray:
    """Remove repeated coefficient tables, keeping first occurrences in order."""
    flat = np.ascontiguousarray(stack.reshape(stack.shape[0], -1))
    rows = flat.view(np.dtype((np.void, flat.dtype.itemsize * flat.shape[1]))).ravel()
    _, first = np.unique(rows, return_index=True)
    return stack[np.sort(first)]


def _sign_patterns(n_bits: int) -> np.ndarray:
    """All ``(2**n_bits, n_bits)`` +/-1 patterns, first row all +1."""
    bits = (np.arange(2**n_bits)[:, None] >> np.arange(n_bits)[None, :]) & 1
    return 1 - 2 * bits


def _flip_tensors(settings: tuple[int, ...]) -> np.ndarray:
    """Sign tensors for every output-flip pattern: ``F[f, j_1..j_N] = prod_i s_{i, j_i}`` (absent -> 1)."""
    total = sum(settings)
    pats = _sign_patterns(total)
    out = np.ones((pats.shape[0],) + tuple(m + 1 for m in settings), dtype=np.int8)
    offset = 0
    for axis, m in enumerate(settings):
        vec = np.ones((pats.shape[0], m + 1), dtype=np.int8)
        vec[:, 1:] = pats[:, offset : offset + m]
        shape = [pats.shape[0]] + [1] * len(settings)
        shape[axis + 1] = m + 1
        out = out * vec.reshape(shape)
        offset += m
    return out


def symmetry_orbit(base: BellInequality, scenario: Scenario, name: str = "") -> InequalityFamily:
    """All distinct relabelings of ``base`` inside ``scenario``.

    Relabelings are party permutations, ordered injections of each base party's
    settings into its host party's settings, and output flips of every setting.
    """
    base = base.compressed()
    b_set = base.scenario.settings
    n = scenario.n_parties
    if base.scenario.n_parties != n:
        raise ValueError(f"base has {base.scenario.n_parties} parties, scenario has {n}")
    flipped = _dedup(base.coeffs[None].astype(np.int16) * _flip_tensors(b_set))
    chunks = []
    for perm in itertools.permutations(range(n)):
        # base party p is hosted by scenario party perm[p]
        if any(b_set[p] > scenario.settings[perm[p]] for p in range(n)):
            continue
        inverse = [perm.index(i) for i in range(n)]
        moved = flipped.transpose([0] + [1 + inverse[i] for i in range(n)])
        injections = [
            list(itertools.permutations(range(scenario.settings[i]), b_set[inverse[i]])) for i in range(n)
        ]
        for choice in itertools.product(*injections):
            out = np.zeros((moved.shape[0],) + scenario.shape, dtype=np.int16)
            idx = [[0] + [j + 1 for j in inj] for inj in choice]
            out[(slice(None),) + np.ix_(*idx)] = moved
            chunks.append(out)
    if not chunks:
        raise ValueError(f"inequality {base.name or base.to_string()} does not fit scenario {scenario}")
    return InequalityFamily(scenario, _dedup(np.concatenate(chunks)).astype(np.int64), name or base.name, "orbit")


CHSH_BASE = np.array([[1, 1], [1, -1]])


def lifted_chsh_family(scenario: Scenario) -> InequalityFamily:
    """Every variant of ``<(CHSH - 2) prod_{i>=3} (1 - E^i)> <= 0`` in ``scenario``.

    Enumerates ordered CHSH party pairs, ordered setting pairs for both CHSH
    parties, one setting for every other party and all output flips of the
    chosen settings, then removes duplicate tables.
    """
    n = scenario.n_parties
    capable = [i for i, m in enumerate(scenario.settings) if m >= 2]
    if len(capable) < 2:
        raise ValueError(f"scenario {scenario} needs two parties with at least two settings")
    chunks = []
    for p, q in itertools.permutations(capable, 2):
        rest = [i for i in range(n) if i not in (p, q)]
        flips = _sign_patterns(4 + len(rest))
        for a in itertools.permutations(range(scenario.settings[p]), 2):
            for b in itertools.permutations(range(scenario.settings[q]), 2):
                for c in itertools.product(*(range(scenario.settings[i]) for i in rest)):
                    chunks.append(_lifted_tables(scenario, p, q, rest, a, b, c, flips))
    return InequalityFamily(scenario, _dedup(np.concatenate(chunks)).astype(np.int64), "I_opt", "lifted-chsh")


def _lifted_tables(scenario, p, q, rest, a, b, c, flips):
    n = scenario.n_parties
    count = flips.shape[0]
    pair = np.zeros((count, scenario.shape[p], scenario.shape[q]), dtype=np.int16)
    pair[:, 0, 0] = -2
    for x in range(2):
        for y in range(2):
            pair[:, a[x] + 1, b[y] + 1] = CHSH_BASE[x, y] * flips[:, x] * flips[:, 2 + y]
    shape = [count] + [1] * n
    shape[p + 1], shape[q + 1] = scenario.shape[p], scenario.shape[q]
    if p > q:
        pair = pair.transpose(0, 2, 1)
    out = pair.reshape(shape)
    for k, (i, ci) in enumerate(zip(rest, c)):
        vec = np.zeros((count, scenario.shape[i]), dtype=np.int16)
        vec[:, 0] = 1
        vec[:, ci + 1] = -flips[:, 4 + k]
        vshape = [count] + [1] * n
        vshape[i + 1] = scenario.shape[i]
        out = out * vec.reshape(vshape)
    return out


def lifted_chsh_base(n_parties: int) -> BellInequality:
    """The representative with CHSH on the first two parties and setting 0 elsewhere."""
    settings = (2, 2) + (1,) * (n_parties - 2)
    return lifted_chsh_family(Scenario(settings))[0]


# ---------------------------------------------------------------------------
# evaluation


def evaluate(ineq: BellInequality, t: CorrelationTensor) -> float:
    if ineq.scenario != t.scenario:
        raise ValueError(f"inequality scenario {ineq.scenario} differs from correlator scenario {t.scenario}")
    return float(np.sum(ineq.coeffs * t.values))


def critical_visibility(ineq: BellInequality, t: CorrelationTensor, eps: float = VIOLATION_EPS) -> Optional[float]:
    """Visibility at which white noise brings the value back to 0, or ``None`` without violation.

    Correlators scale linearly with visibility, so the value is ``w_0 + v A``.
    """
    value = evaluate(ineq, t)
    if value <= eps:
        return None
    w0 = float(ineq.constant)
    return -w0 / (value - w0)


def max_over_family(family: InequalityFamily, t: CorrelationTensor) -> tuple[float, BellInequality]:
    if len(family) == 0:
        raise ValueError("empty family")
    if family.scenario != t.scenario:
        raise ValueError("family and correlators live in different scenarios")
    values = family.matrix @ t.values.reshape(-1)
    best = int(np.argmax(values))
    return float(values[best]), family[best]


def family_scores(matrix: np.ndarray, corr: np.ndarray, eps: float = VIOLATION_EPS, chunk: int = 1 << 22):
    """Best value and best strength over variants for a batch of correlator tensors.

    ``matrix`` is ``(V, P)``, ``corr`` is ``(B, ...)`` with ``P`` entries per sample.
    Strength is ``1 - v_crit`` maximized over violated variants, 0 when none is violated.
    """
    corr = corr.reshape(corr.shape[0], -1)
    w0 = matrix[:, 0]
    n_var = matrix.shape[0]
    step = max(1, chunk // max(n_var, 1))
    best_value = np.empty(corr.shape[0])
    best_strength = np.zeros(corr.shape[0])
    for lo in range(0, corr.shape[0], step):
        vals = corr[lo : lo + step] @ matrix.T
        best_value[lo : lo + step] = vals.max(axis=1)
        active = vals - w0
        with np.errstate(divide="ignore", invalid="ignore"):
            strength = np.where(vals > eps, 1 + w0 / active, 0.0)
        best_strength[lo : lo + step] = strength.max(axis=1)
    return best_value, best_strength
