"""Named states and Bell inequalities used throughout the package.

Inequalities are written with party letters A, B, C and zero-based settings, in
the form ``expression <= 0`` (the classical bound is folded into the constant).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ineq import BellInequality, lifted_chsh_base, parse_inequality
from .qcore import Scenario, product_state

_INEQUALITIES = {
    "I_5": "A0 - A0B0C0 - A0B0C1 + A0B1 - A0B1C0 + A0C1 + A1B0 - A1B0C0 - A1B1 + A1B1C1 + A1C0 - A1C1"
    " + B0 + B0C1 + B1C0 - B1C1 + C0 - 3",
    "I_6": "A0 + A0B0 - A0B0C0 - A0B1C0 - A0B1C1 + A0C1 - A1B0C0 + A1B0C1 + A1C0 - A1C1 + B0 - B0C1"
    " + B1C0 + B1C1 + C0 - 3",
    "I_13": "2A0B0 + A0B0C0 + A0B0C1 + A0B1C0 - A0B1C1 + 2A1B0 - A1B0C0 - A1B0C1 - A1B1C0 + A1B1C1 - 4",
    "I_16": "A0 + A0B0 + A0B0C1 + A0B1C0 - A0B1C1 + A0C0 + A1 + A1B0 - 2A1B0C0 - A1B0C1 - A1B1C0"
    " + A1B1C1 + A1C0 - 4",
    "I_19": "A0 + A0B0 + A0B0C1 - A0B1C0 + A0B1C1 + A0C0 + A1 + A1B0 - A1B0C1 - A1B1C0 - A1B1C1 + A1C0"
    " - 2B0C0 + 2B1C0 - 4",
    "I_21": "A0 + A0B0 - 2A0B0C0 + A0B0C1 - A0B1C0 - A0B1C1 + A0C0 + A1 + B1 - A1B0C0 - A1B0C1 - A1B1"
    " + A1B1C1 + A1C0 + B0 + B0C0 + B1C0 - 4",
    "I_30": "A0 + 2A0B0 + 2A0B0C0 - 2A0B0C1 + A0B1 + A0B1C0 + 2A0B1C1 + A0C0 - 2A1B0 + A1B0C0 - A1B0C1"
    " - A1B1 + 2A1B1C0 + A1B1C1 + A1 - A1C0 - B0C0 + B0C1 - B1C0 - B1C1 - 6",
    "I322_1": "-2A0B0C0 - 2A0B1C1 + A1B0C0 - A1B0C1 + A1B1C0 - A1B1C1 - A2B0C0 - A2B0C1 + A2B1C0"
    " + A2B1C1 - 4",
    # with constant -4 the local maximum over deterministic strategies is 1, so the bound is 5
    "I322_2": "-A0 + A0B0C0 + A0B1 - A0B1C1 - A0C1 - A1B0C1 - A1B1C0 + A2 - A2B0C0 + A2B1 + A2B1C1"
    " - A2C1 + B0C0 - 5",
    "I322_3": "A0B0C0 - A0B0C1 + A0B1C0 + A0B1C1 + 2A0C0 + A1B1C0 + A1B1C1 - A1C0 - A1C1 - A2B0C0"
    " + A2B0C1 + A2C0 - A2C1 - 4",
    "I322_4": "A0B0 + 2A0B0C0 + A0B0C1 + A0B1 - A0B1C1 - A1B0 + A1B0C0 - A1B1 + A1B1C0 + A2B0C0"
    " - A2B0C1 - A2B1C0 + A2B1C1 - 4",
    "I322_5": "-A0B0C0 + A0B0C1 + A0C0 - A0C1 + A1B0 - A1B0C0 + A1B1 + B1 + A1B1C0 + 2A1C1 + A2B1C0"
    " + A2B1C1 - A2C0 - A2C1 + B0 - B0C1 - B1C1 - 4",
    "I322_6": "2A0B1C0 - 2A0B1C1 - A1C0 - A1C1 - A1B0C0 - A1B0C1 + A2C0 + A2C1 - A2B0C0 - A2B0C1 - 4",
    "I322_7": "-A0B0C0 - A0B0C1 - A0B1C0 - A0B1C1 - A1B0C0 + A1B0C1 - A1B1C0 + A1B1C1 - 2A2B0 + 2A2B1 - 4",
    "I322_8": "A0 - A0B0 + A0C0 - A0B0C1 - A0B1C0 + A0B1C1 + A1B0 - A1B0C0 + A1B1 - A1B1C0 - A2 - A2B1"
    " - A2C0 - A2B0C0 - A2B0C1 + A2B1C1 - 4",
    "I322_9": "A0B1C0 + A0B1C1 - A1B1 - A1B1C0 + A2B1 - A2B1C1 - A0B2C0 - A0B2C1 - A1B2 - A1B2C1"
    " + A2B2 - A2B2C0 - A1C0 + A1C1 - A2C0 + A2C1 - 4",
    "I332_1": "-A0B0 + A0B0C0 - 2A0B1C1 + A0B2 + A0B2C0 + 2A1B0C1 + A2B0 + 4A1B1C0 + 2A1B2C1 + A2B0C0"
    " - 2A2B1C1 - A2B2 + A2B2C0 - 8",
    "I332_2": "-A0B0C0 - A0B0C1 - A0B1C0 + A0B1C1 + 2A0B2C1 - A1B1C0 + A1B1C1 + A1B2C0 - A1B2C1"
    " - A2B0C0 - A2B0C1 - A2B2C0 - A2B2C1 - 4",
    "I332_3": "-A0B0 + A0B0C0 + A0B1C0 - A0B1C1 - A0B2 + A0B2C1 + A1B0 - A1B0C0 - A1B1 - A1B1C1"
    " + A1B2C0 + A1B2C1 - A2B1 - A2B1C0 - A2B2 - A2B2C0 - 4",
    "I332_4": "A0B0C0 + A0B0C1 + A0B1C0 + A0B1C1 - A1B0 + A1B0C0 + A1B1 - A1B1C1 + A1B2C0 - A1B2C1"
    " + A2B0 + A2B0C1 - A2B1 - A2B1C0 + A2B2C0 - A2B2C1 - 4",
    "I332_5": "2A0B2C0 - A0B0C1 + A0B2C1 - A0B0 + 2A0B1 + A0B2 + 2A1B0C0 + 2A1B1C0 - 2A1B1C1"
    " + 2A1B2C1 + 2A2B2C0 - A2B0C1 + A2B2C1 + A2B0 - 2A2B1 - A2B2 - 8",
    "I332_6": "A0B0C0 - A0B0C2 - A0B1C0 + A0B1C2 + A1B0C0 - A1B0C2 - A1B1C2 + A2B2C0 + A2B2C2 - A2C0"
    " - A2C2 - B2C0 - B2C2 + A1B1C0 - C0 - C2 - 4",
    "I333_1": "A0B0C0 + A0B0C1 + A0B2C0 + A0B2C1 - A1B0C0 - A1B0C2 - A1B1C1 + A1B2C1 + A1B2C2 - A2B0C1"
    " + A2B0C2 + A2B1C0 + A1B1C0 - A2B1C1 + A2B2C0 - A2B2C2 - 4",
    "I333_2": "A0B0C0 - A0B0C2 + A0B1C1 - A0B1C2 + A0B2C0 - A0B2C1 + A1B0C2 + 2A1B1C0 + A1B1C1 + A1B1C2"
    " + A1B2C0 - A1B0C0 - A1B2C1 - 4",
    # Mermin form <A0B0C1 + A0B1C0 + A1B0C0 - A1B1C1> <= 2
    "MABK3": "A0B0C1 + A0B1C0 + A1B0C0 - A1B1C1 - 2",
}

# non-constant term counts of the reference expressions, a transcription check
EXPECTED_TERM_COUNTS = {
    "I_5": 17, "I_6": 15, "I_13": 10, "I_16": 13, "I_19": 14, "I_21": 17, "I_30": 20,
    "I322_1": 10, "I322_2": 13, "I322_3": 13, "I322_4": 13, "I322_5": 17, "I322_6": 10,
    "I322_7": 10, "I322_8": 16, "I322_9": 16, "I332_1": 13, "I332_2": 13, "I332_3": 16,
    "I332_4": 16, "I332_5": 16, "I332_6": 16, "I333_1": 16, "I333_2": 13, "MABK3": 4,
}

def _basis_sum(n: int, terms: dict[str, float]) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    for bits, amp in terms.items():
        psi[int(bits, 2)] += amp
    return psi / np.linalg.norm(psi)


def _ghz(n):
    return _basis_sum(n, {"0" * n: 1, "1" * n: 1})


def _w(n):
    return _basis_sum(n, {format(1 << k, f"0{n}b"): 1 for k in range(n)})


def _dicke2(n):
    return _basis_sum(n, {format(x, f"0{n}b"): 1 for x in range(2**n) if bin(x).count("1") == 2})


def _signed(n, text):
    terms = {}
    for tok in text.split():
        sign = -1 if tok.startswith("-") else 1
        terms[tok.lstrip("+-")] = sign
    return _basis_sum(n, terms)


_PSI3 = [
    (0.522, 0.0), (0.692, 2.387), (0.172, -2.972), (0.140, -0.102),
    (0.296, 2.864), (0.159, 0.068), (0.206, 2.671), (0.208, 3.087),
]

_STATES = {
    "GHZ2": lambda: _ghz(2),
    "GHZ3": lambda: _ghz(3),
    "W3": lambda: _w(3),
    "GHZ4": lambda: _ghz(4),
    "W4": lambda: _w(4),
    "D2_4": lambda: _dicke2(4),
    "Cl4": lambda: _signed(4, "0000 1100 0011 -1111"),
    "GHZ5": lambda: _ghz(5),
    "W5": lambda: _w(5),
    "D2_5": lambda: _dicke2(5),
    "LCl5": lambda: _signed(
        5, "00000 00010 00101 -00111 01000 01010 01101 -01111 10001 -10011 10100 10110 -11001 11011 -11100 -11110"
    ),
    "RCl5": lambda: _signed(
        5, "00001 00010 00100 -00111 01000 01011 01101 -01110 10000 -10011 10101 10110 -11001 11010 -11100 -11111"
    ),
    "psi3": lambda: _basis_sum(3, {format(i, "03b"): r * np.exp(1j * ph) for i, (r, ph) in enumerate(_PSI3)}),
    "GHZ2x00": lambda: product_state(_ghz(2), [1, 0], [1, 0]),
}


@dataclass(frozen=True)
class NamedInequality:
    name: str
    inequality: BellInequality

    @property
    def base_scenario(self) -> Scenario:
        return self.inequality.scenario


def get_state(name: str) -> np.ndarray:
    try:
        return _STATES[name]()
    except KeyError:
        raise KeyError(f"unknown state {name!r}; known: {', '.join(_STATES)}") from None


@lru_cache(maxsize=None)
def get_inequality(name: str) -> NamedInequality:
    if name == "I_opt":
        return NamedInequality(name, BellInequality(Scenario((2, 2, 1)), lifted_chsh_base(3).coeffs, name))
    try:
        expr = _INEQUALITIES[name]
    except KeyError:
        raise KeyError(f"unknown inequality {name!r}; known: I_opt, {', '.join(_INEQUALITIES)}") from None
    return NamedInequality(name, parse_inequality(expr, name=name))


def state_names() -> list[str]:
    return list(_STATES)


def inequality_names() -> list[str]:
    return ["I_opt"] + list(_INEQUALITIES)


def list_catalog() -> dict[str, dict]:
    """Names with shapes: states by qubit count, inequalities by base scenario."""
    states = {name: {"kind": "state", "n_qubits": int(np.log2(get_state(name).size))} for name in _STATES}
    ineqs = {
        name: {"kind": "inequality", "scenario": str(get_inequality(name).base_scenario)}
        for name in inequality_names()
    }
    return {**states, **ineqs}


def inequality_record(name: str) -> dict:
    ineq = get_inequality(name).inequality
    terms = [
        {"term": [j - 1 if j else None for j in term], "coefficient": int(c)}
        for term, c in sorted(ineq.terms.items())
        if any(term)
    ]
    return {
        "name": name,
        "scenario": list(ineq.scenario.settings),
        "expression": ineq.to_string(),
        "terms": terms,
        "bound": -int(ineq.constant),
    }


def export_catalog(path=None) -> dict:
    """JSON document with every inequality (terms read ``sum coefficient * <E...> <= bound``) and state."""
    doc = {
        "format": "nonlocality-catalog/1",
        "inequalities": [inequality_record(name) for name in inequality_names()],
        "states": [
            {"name": name, "amplitudes": [[float(a.real), float(a.imag)] for a in get_state(name)]}
            for name in _STATES
        ],
    }
    if path is not None:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return doc
