"""Local polytope oracle built on deterministic strategies.

Every local behavior is a convex mixture of deterministic strategies, each of
which fixes one outcome per (party, setting). Membership and critical visibility
are linear programs over the mixture weights, solved with HiGHS through
:func:`scipy.optimize.linprog`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .ineq import BellInequality
from .qcore import (
    Behavior,
    Scenario,
    SettingsSample,
    correlation_tensor,
)

log = logging.getLogger(__name__)

MAX_STRATEGIES = 2**20
EQ_TOL = 1e-8
BOUND_TOL = 1e-9
# v* below 1 - LOCAL_MARGIN counts as nonlocal; anything closer is treated as local
LOCAL_MARGIN = 1e-7


class LPFailure(RuntimeError):
    """The LP solver did not return a usable answer."""


@dataclass(frozen=True)
class LpResult:
    feasible: bool
    v_star: float = 1.0
    certificate: Optional[np.ndarray] = None

    @property
    def strength(self) -> float:
        return 1.0 - self.v_star


def _check_size(scenario: Scenario) -> int:
    count = 2 ** sum(scenario.settings)
    if count > MAX_STRATEGIES:
        raise ValueError(f"scenario {scenario} has {count} deterministic strategies (limit {MAX_STRATEGIES})")
    return count


def deterministic_strategies(scenario: Scenario) -> np.ndarray:
    """Outcome bits ``(K, sum m_i)``, party-major, with the first party's bits varying slowest."""
    _check_size(scenario)
    total = sum(scenario.settings)
    idx = np.arange(2**total)
    return ((idx[:, None] >> np.arange(total - 1, -1, -1)[None, :]) & 1).astype(np.int8)


@lru_cache(maxsize=32)
def vertex_correlators(scenario: Scenario) -> np.ndarray:
    """``D[k, t]``: correlator ``t`` (flattened scenario shape) under deterministic strategy ``k``."""
    _check_size(scenario)
    out = np.ones((1, 1), dtype=np.int8)
    for m in scenario.settings:
        bits = ((np.arange(2**m)[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1).astype(np.int8)
        local = np.ones((2**m, m + 1), dtype=np.int8)
        local[:, 1:] = 1 - 2 * bits
        out = np.einsum("ka,lb->klab", out, local).reshape(out.shape[0] * local.shape[0], -1)
    out.setflags(write=False)
    return out


def vertices(scenario: Scenario) -> np.ndarray:
    """Deterministic behaviors ``(K, m_1, ..., m_N, 2, ..., 2)`` with entries in {0, 1}."""
    strategies = deterministic_strategies(scenario)
    n = scenario.n_parties
    out = np.zeros((strategies.shape[0],) + scenario.settings + (2,) * n, dtype=np.int8)
    offsets = np.cumsum((0,) + scenario.settings[:-1])
    for k_idx in np.ndindex(*scenario.settings):
        cols = [offsets[i] + k_idx[i] for i in range(n)]
        outcomes = strategies[:, cols]
        out[(np.arange(strategies.shape[0]),) + k_idx + tuple(outcomes.T)] = 1
    return out


def classical_bound(ineq: BellInequality):
    """Maximum of the inequality over deterministic strategies.

    Integer coefficients give an exact integer result.
    """
    d = vertex_correlators(ineq.scenario)
    w = ineq.coeffs.reshape(-1)
    if np.issubdtype(w.dtype, np.integer):
        best = None
        for lo in range(0, d.shape[0], 1 << 14):
            vals = d[lo : lo + (1 << 14)].astype(np.int64) @ w.astype(np.int64)
            top = int(vals.max())
            best = top if best is None else max(best, top)
        return best
    return float((d.astype(float) @ w.astype(float)).max())


def _solve(c, a_eq, b_eq, bounds) -> np.ndarray:
    res = linprog(
        c,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs-ds",
        options={
            "presolve": False,
            "primal_feasibility_tolerance": EQ_TOL,
            "dual_feasibility_tolerance": BOUND_TOL,
        },
    )
    return res


def is_local(b: Behavior) -> LpResult:
    """Feasibility of ``sum_k q_k V_k = b`` with ``q`` a probability vector."""
    verts = vertices(b.scenario).reshape(-1, b.probs.size).astype(float)
    k = verts.shape[0]
    a_eq = np.vstack([verts.T, np.ones((1, k))])
    b_eq = np.concatenate([b.probs.reshape(-1), [1.0]])
    res = _solve(np.zeros(k), a_eq, b_eq, [(0, None)] * k)
    if res.status == 2:
        return LpResult(False, v_star=float("nan"))
    if res.status != 0:
        raise LPFailure(f"membership LP failed: {res.message}")
    q = res.x
    if np.max(np.abs(verts.T @ q - b.probs.reshape(-1))) > 1e-7:
        raise LPFailure("membership LP returned an inaccurate decomposition")
    return LpResult(True, v_star=1.0, certificate=q)


def visibility_lp(scenario: Scenario, correlators: np.ndarray) -> float:
    """Largest ``v`` such that the correlators scaled by ``v`` are a mixture of deterministic ones.

    White noise has all non-constant correlators equal to zero, so the noisy
    behavior ``v P + (1 - v) / 2**N`` has correlators ``v C``.
    """
    d = vertex_correlators(scenario).astype(float)
    c = np.asarray(correlators, dtype=float).reshape(-1)
    k = d.shape[0]
    # variables: (v, q_1..q_K); rows: non-constant correlators, then normalization
    a_eq = np.zeros((d.shape[1], k + 1))
    a_eq[:-1, 0] = c[1:]
    a_eq[:-1, 1:] = -d[:, 1:].T
    a_eq[-1, 1:] = 1.0
    b_eq = np.zeros(d.shape[1])
    b_eq[-1] = 1.0
    cost = np.zeros(k + 1)
    cost[0] = -1.0
    res = _solve(cost, a_eq, b_eq, [(0, 1)] + [(0, None)] * k)
    if res.status != 0:
        raise LPFailure(f"visibility LP failed: {res.message}")
    return float(min(1.0, max(0.0, res.x[0])))


def critical_visibility_lp(rho: np.ndarray, s: SettingsSample) -> float:
    """``v*`` for the behavior of ``rho`` under settings ``s``; strength is ``1 - v*``."""
    t = correlation_tensor(rho, s)
    return visibility_lp(t.scenario, t.values)


def lp_strength(scenario: Scenario, correlators: np.ndarray) -> float:
    """``1 - v*``, with near-threshold answers reported as 0."""
    s = 1.0 - visibility_lp(scenario, correlators)
    return s if s > LOCAL_MARGIN else 0.0
