"""Monte Carlo estimators of nonlocal fraction and nonlocality strength.

Samples are processed in fixed blocks of ``BLOCK`` draws; block ``b`` draws from
``SeedSequence(seed, spawn_key=(b,))``. Results therefore depend only on the seed
and the sample count, never on how many worker threads evaluate the blocks, and
two estimators run with the same seed see the same measurement settings.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from . import catalog
from .ineq import VIOLATION_EPS, InequalityFamily, family_scores, lifted_chsh_family, symmetry_orbit
from .polytope import LOCAL_MARGIN, LPFailure, vertex_correlators, visibility_lp
from .qcore import (
    Scenario,
    correlators_from_pauli,
    mix_with_white_noise,
    pauli_tensor,
    pauli_tensors,
    random_pure_states,
    sample_directions,
)

log = logging.getLogger(__name__)

BLOCK = 2048
BIN_WIDTH = 0.005
DEFAULT_SAMPLES = 50_000
DEFAULT_STATES = 120_000


@dataclass
class StrengthHistogram:
    """Binned strength mass: ``counts[k]`` samples with strength in ``[k w, (k + 1) w)``."""

    counts: np.ndarray
    n_samples: int
    bin_width: float = BIN_WIDTH

    @property
    def bins(self) -> np.ndarray:
        return self.counts / self.n_samples if self.n_samples else np.zeros(len(self.counts))

    @property
    def total_mass(self) -> float:
        return int(self.counts.sum()) / self.n_samples if self.n_samples else 0.0

    @property
    def edges(self) -> np.ndarray:
        return np.arange(len(self.counts) + 1) * self.bin_width

    @property
    def density(self) -> np.ndarray:
        return self.bins / self.bin_width

    def rows(self):
        """``(s_low, s_high, mass, density)`` per bin."""
        e = self.edges
        return [
            (float(e[k]), float(e[k + 1]), float(m), float(d))
            for k, (m, d) in enumerate(zip(self.bins, self.density))
        ]


@dataclass
class Estimate:
    p_v: float
    stderr_p_v: float
    s_bar: float
    histogram: StrengthHistogram
    n_samples: int
    seed: int
    detector: str
    discarded: int = 0
    s_max_observed: float = 0.0
    scenario: str = ""
    visibility: float = 1.0

    def to_dict(self) -> dict:
        return {
            "p_v": self.p_v,
            "stderr_p_v": self.stderr_p_v,
            "s_bar": self.s_bar,
            "s_max_observed": self.s_max_observed,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "detector": self.detector,
            "discarded": self.discarded,
            "scenario": self.scenario,
            "visibility": self.visibility,
            "histogram": {
                "bin_width": self.histogram.bin_width,
                "counts": [int(c) for c in self.histogram.counts],
                "total_mass": self.histogram.total_mass,
            },
        }


@dataclass
class TypicalityEstimate:
    t_v: float
    t_s: float
    stderr_t_v: float
    n_states: int
    seed: int
    detector: str
    scenario: str = ""
    draws_per_state: int = 1
    discarded: int = 0
    histogram: Optional[StrengthHistogram] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "t_v": self.t_v,
            "t_s": self.t_s,
            "stderr_t_v": self.stderr_t_v,
            "n_states": self.n_states,
            "draws_per_state": self.draws_per_state,
            "seed": self.seed,
            "detector": self.detector,
            "scenario": self.scenario,
            "discarded": self.discarded,
        }


# ---------------------------------------------------------------------------
# detectors


@lru_cache(maxsize=64)
def family_for(name: str, scenario: Scenario) -> InequalityFamily:
    """``"iopt"`` / ``"I_opt"`` is the lifted-CHSH family; any other catalog name is its orbit."""
    if name.lower() in ("iopt", "i_opt"):
        return lifted_chsh_family(scenario)
    return symmetry_orbit(catalog.get_inequality(name).inequality, scenario, name)


class FamilyDetector:
    """Violation of any variant in a union of inequality families."""

    def __init__(self, names: Sequence[str], scenario: Scenario, eps: float = VIOLATION_EPS):
        self.names = list(names)
        self.scenario = scenario
        self.eps = eps
        fams = [family_for(n, scenario) for n in self.names]
        self.family = fams[0] if len(fams) == 1 else InequalityFamily.union(fams)
        self.matrix = self.family.matrix

    @property
    def label(self) -> str:
        return f"family({','.join(self.names)})"

    def score(self, corr: np.ndarray):
        best_value, strength = family_scores(self.matrix, corr, self.eps)
        violated = best_value > self.eps
        return violated, np.where(violated, strength, 0.0), np.ones(len(violated), dtype=bool)


class LPDetector:
    """Exact test against the full local polytope via the visibility LP."""

    label = "lp"

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        vertex_correlators(scenario)

    def score(self, corr: np.ndarray):
        n = corr.shape[0]
        strength = np.zeros(n)
        valid = np.ones(n, dtype=bool)
        for i in range(n):
            try:
                strength[i] = 1.0 - visibility_lp(self.scenario, corr[i])
            except LPFailure as exc:
                log.warning("discarding sample: %s", exc)
                valid[i] = False
        violated = valid & (strength > LOCAL_MARGIN)
        return violated, np.where(violated, strength, 0.0), valid


Detector = Union[FamilyDetector, LPDetector]


def make_detector(spec: Union[str, Sequence[str], Detector], scenario: Scenario, eps: float = VIOLATION_EPS) -> Detector:
    """Build a detector from ``"lp"``, ``"iopt"``, ``"I_5"``, ``"iopt,I_5"`` or a list of names."""
    if isinstance(spec, (FamilyDetector, LPDetector)):
        return spec
    names = [s.strip() for s in spec.split(",")] if isinstance(spec, str) else list(spec)
    if names == ["lp"]:
        return LPDetector(scenario)
    if "lp" in names:
        raise ValueError("'lp' cannot be combined with inequality families")
    return FamilyDetector(names, scenario, eps)


# ---------------------------------------------------------------------------
# sampling core


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _settings_draw(rng, scenario: Scenario, count: int):
    return [sample_directions(rng, (count, m)) for m in scenario.settings]


def sample_correlators(pauli: np.ndarray, scenario: Scenario, seed: int, block: int, count: int) -> np.ndarray:
    """Correlator tensors for ``count`` random settings samples of block ``block``."""
    rng = block_rng(seed, block)
    corr = correlators_from_pauli(pauli, _settings_draw(rng, scenario, count))
    corr[(slice(None),) + (0,) * scenario.n_parties] = 1.0
    return corr


@dataclass
class _BlockResult:
    counts: np.ndarray
    violations: int
    s_sum: float
    s_max: float
    valid: int


def _n_bins(width: float) -> int:
    return int(math.ceil(1.0 / width - 1e-9))


def _summarize(violated, strength, valid, width) -> _BlockResult:
    n_bins = _n_bins(width)
    s = strength[violated]
    idx = np.minimum((s / width).astype(int), n_bins - 1)
    return _BlockResult(
        counts=np.bincount(idx, minlength=n_bins),
        violations=int(violated.sum()),
        s_sum=float(strength[valid].sum()),
        s_max=float(s.max()) if s.size else 0.0,
        valid=int(valid.sum()),
    )


def _run_blocks(fn, n: int, threads: int) -> list[_BlockResult]:
    blocks = [(b, min(BLOCK, n - b * BLOCK)) for b in range(math.ceil(n / BLOCK))]
    if threads <= 1:
        return [fn(b, c) for b, c in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda bc: fn(*bc), blocks))


def _reduce(results: list[_BlockResult], n: int, width: float):
    counts = np.zeros(_n_bins(width), dtype=np.int64)
    violations = valid = 0
    s_sum = s_max = 0.0
    for r in results:
        counts += r.counts
        violations += r.violations
        valid += r.valid
        s_sum += r.s_sum
        s_max = max(s_max, r.s_max)
    p = violations / valid if valid else 0.0
    stderr = math.sqrt(p * (1 - p) / valid) if valid else 0.0
    s_bar = s_sum / valid if valid else 0.0
    return StrengthHistogram(counts, valid, width), p, stderr, s_bar, s_max, n - valid


def _as_pauli(state, v: float) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if v != 1.0:
        state = mix_with_white_noise(state, v)
    return pauli_tensor(state)


def estimate_strength(
    state,
    scenario: Union[Scenario, str],
    n: int = DEFAULT_SAMPLES,
    detector="iopt",
    seed: int = 0,
    *,
    v: float = 1.0,
    threads: int = 1,
    eps: float = VIOLATION_EPS,
    bin_width: float = BIN_WIDTH,
) -> Estimate:
    """Nonlocal fraction, mean strength and strength histogram over ``n`` random settings samples.

    ``state`` is a state vector or density matrix; ``v < 1`` mixes it with white noise.
    Non-violating samples contribute strength 0 to the mean.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    scenario = Scenario.parse(scenario) if isinstance(scenario, str) else scenario
    pauli = _as_pauli(state, v)
    if pauli.ndim != scenario.n_parties:
        raise ValueError(f"state has {pauli.ndim} qubits, scenario {scenario} has {scenario.n_parties} parties")
    det = make_detector(detector, scenario, eps)

    def block(b, count):
        corr = sample_correlators(pauli, scenario, seed, b, count)
        return _summarize(*det.score(corr), bin_width)

    hist, p, stderr, s_bar, s_max, discarded = _reduce(_run_blocks(block, n, threads), n, bin_width)
    return Estimate(
        p_v=p,
        stderr_p_v=stderr,
        s_bar=s_bar,
        histogram=hist,
        n_samples=n,
        seed=seed,
        detector=det.label,
        discarded=discarded,
        s_max_observed=s_max,
        scenario=str(scenario),
        visibility=v,
    )


def estimate_nonlocal_fraction(state, scenario, n: int = DEFAULT_SAMPLES, detector="iopt", seed: int = 0, **kw) -> Estimate:
    """Fraction of random settings samples whose statistics are detected as nonlocal."""
    return estimate_strength(state, scenario, n, detector, seed, **kw)


def estimate_with_noise(state, v: float, scenario, n: int = DEFAULT_SAMPLES, detector="iopt", seed: int = 0, **kw) -> Estimate:
    if not 0 <= v <= 1:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    return estimate_strength(state, scenario, n, detector, seed, v=v, **kw)


def estimate_typicality(
    n_qubits_: int,
    scenario: Union[Scenario, str],
    n_states: int = DEFAULT_STATES,
    detector="iopt",
    seed: int = 0,
    *,
    threads: int = 1,
    eps: float = VIOLATION_EPS,
    bin_width: float = BIN_WIDTH,
) -> TypicalityEstimate:
    """Average fraction and strength over Haar-random pure states, one settings draw per state."""
    if n_states < 1:
        raise ValueError("need at least one state")
    scenario = Scenario.parse(scenario) if isinstance(scenario, str) else scenario
    if n_qubits_ != scenario.n_parties:
        raise ValueError(f"{n_qubits_} qubits do not match scenario {scenario}")
    det = make_detector(detector, scenario, eps)

    def block(b, count):
        rng = block_rng(seed, b)
        states = random_pure_states(n_qubits_, rng, count)
        corr = correlators_from_pauli(pauli_tensors(states), _settings_draw(rng, scenario, count))
        corr[(slice(None),) + (0,) * scenario.n_parties] = 1.0
        return _summarize(*det.score(corr), bin_width)

    hist, p, stderr, s_bar, _, discarded = _reduce(_run_blocks(block, n_states, threads), n_states, bin_width)
    return TypicalityEstimate(
        t_v=p,
        t_s=s_bar,
        stderr_t_v=stderr,
        n_states=n_states,
        seed=seed,
        detector=det.label,
        scenario=str(scenario),
        discarded=discarded,
        histogram=hist,
    )
