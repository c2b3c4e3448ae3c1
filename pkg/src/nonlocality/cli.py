"""Command-line front end.

Every subcommand prints a JSON document (sorted keys, two-space indent) to stdout
and optionally writes it to ``--output``. Exit codes: 0 success, 2 bad input,
3 when samples had to be discarded after solver failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import catalog, mc
from .ineq import VIOLATION_EPS
from .qcore import Scenario, n_qubits

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
THREADS_ENV = "NONLOCALITY_THREADS"

# nonlocal fraction of GHZ_2 in the i x j scenario; bounds what two-producible states reach
P22 = 2 * (math.pi - 3)
P32 = 0.52401
P33 = 0.78219
GENUINE_4_PARTITE = 0.74688


class UsageError(ValueError):
    """Bad user input; maps to exit code 2."""


def _combine(*ps: float) -> float:
    out = 1.0
    for p in ps:
        out *= 1 - p
    return 1 - out


THRESHOLDS = {
    "P22": P22,
    "P32": P32,
    "P33": P33,
    "P2222": _combine(P22, P22),
    "P3222": _combine(P32, P22),
    "P3322": _combine(P33, P22),
    "P3332": _combine(P33, P32),
}

# settings sorted in descending order -> two-producible threshold
_THRESHOLD_FOR = {
    (2, 2, 2): "P22",
    (3, 2, 2): "P32",
    (3, 3, 2): "P33",
    (3, 3, 3): "P33",
    (2, 2, 1, 1): "P22",
    (2, 2, 2, 1): "P22",
    (2, 2, 2, 2): "P2222",
    (3, 2, 2, 2): "P3222",
    (3, 3, 2, 2): "P3322",
    (3, 3, 3, 2): "P3332",
    (2, 2, 1, 1, 1): "P22",
    (2, 2, 2, 1, 1): "P22",
    (2, 2, 2, 2, 1): "P2222",
    (2, 2, 2, 2, 2): "P2222",
}


def threshold_for(scenario: Scenario) -> Optional[tuple[str, float]]:
    """Largest nonlocal fraction reachable by two-producible states, when tabulated."""
    key = _THRESHOLD_FOR.get(tuple(sorted(scenario.settings, reverse=True)))
    return None if key is None else (key, THRESHOLDS[key])


def witness_verdict(p_v: float, stderr: float, threshold: float) -> str:
    if p_v - 2 * stderr > threshold:
        return "detected"
    if p_v + 2 * stderr < threshold:
        return "not detected"
    return "inconclusive"


# ---------------------------------------------------------------------------
# input parsing


def parse_scenario(text: str) -> Scenario:
    try:
        return Scenario.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad scenario {text!r}: {exc}") from exc


def read_amplitudes(path: Path, n_parties: Optional[int] = None) -> np.ndarray:
    """Read a state vector from lines ``index re im``; missing indices are zero.

    Blank lines and ``#`` comments are ignored. The dimension is ``2**n_parties``
    when given, otherwise the smallest power of two covering the largest index.
    """
    entries = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise UsageError(f"{path}:{lineno}: expected 'index re im', got {raw!r}")
        try:
            idx, re_, im = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from exc
        if idx < 0 or idx in entries:
            raise UsageError(f"{path}:{lineno}: invalid or repeated index {idx}")
        entries[idx] = complex(re_, im)
    if not entries:
        raise UsageError(f"{path}: no amplitudes")
    top = max(entries)
    n = n_parties if n_parties is not None else max(1, (top).bit_length())
    dim = 2**n
    if top >= dim:
        raise UsageError(f"{path}: index {top} does not fit {n} qubits")
    psi = np.zeros(dim, dtype=complex)
    for i, a in entries.items():
        psi[i] = a
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise UsageError(f"{path}: zero vector")
    if abs(norm - 1) > 1e-6:
        log.warning("normalizing state from %s (norm %.6g)", path, norm)
    return psi / norm


def load_state(spec: str, scenario: Scenario) -> np.ndarray:
    if spec in catalog.state_names():
        psi = catalog.get_state(spec)
    elif Path(spec).is_file():
        psi = read_amplitudes(Path(spec), scenario.n_parties)
    else:
        raise UsageError(f"unknown state {spec!r}: not a catalog name or a readable file")
    if n_qubits(psi.shape[0]) != scenario.n_parties:
        raise UsageError(f"state {spec} has {n_qubits(psi.shape[0])} qubits, scenario {scenario} needs {scenario.n_parties}")
    return psi


def _threads(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV}={env!r} is not an integer") from exc
    return 1


# ---------------------------------------------------------------------------
# output


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_histogram_csv(hist: mc.StrengthHistogram, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s_low", "s_high", "mass", "density"])
        for row in hist.rows():
            w.writerow([repr(x) for x in row])


# ---------------------------------------------------------------------------
# commands


def _run_estimate(args, detector=None):
    scenario = parse_scenario(args.scenario)
    state = load_state(args.state, scenario)
    try:
        return mc.estimate_strength(
            state,
            scenario,
            args.n,
            detector or args.detector,
            args.seed,
            v=args.v,
            threads=_threads(args.threads),
            eps=args.violation_epsilon,
        )
    except KeyError as exc:
        raise UsageError(f"unknown detector {args.detector!r}: {exc}") from exc


def _estimate_doc(args, est: mc.Estimate) -> dict:
    doc = est.to_dict()
    doc.update(command=args.command, state=args.state, violation_epsilon=args.violation_epsilon)
    return doc


def cmd_fraction(args):
    est = _run_estimate(args)
    return _estimate_doc(args, est), est


cmd_strength = cmd_fraction


def cmd_typicality(args):
    scenario = parse_scenario(args.scenario)
    try:
        est = mc.estimate_typicality(
            scenario.n_parties,
            scenario,
            args.n,
            args.detector,
            args.seed,
            threads=_threads(args.threads),
            eps=args.violation_epsilon,
        )
    except KeyError as exc:
        raise UsageError(f"unknown detector {args.detector!r}: {exc}") from exc
    doc = est.to_dict()
    doc.update(command=args.command, violation_epsilon=args.violation_epsilon)
    return doc, est


def cmd_lp_check(args):
    """LP detector and family detector on the same settings samples."""
    lp = _run_estimate(args, detector="lp")
    fam = _run_estimate(args)
    doc = {
        "command": args.command,
        "state": args.state,
        "scenario": lp.scenario,
        "n_samples": args.n,
        "seed": args.seed,
        "visibility": args.v,
        "violation_epsilon": args.violation_epsilon,
        "lp": lp.to_dict(),
        "family": fam.to_dict(),
        "gap_p_v": lp.p_v - fam.p_v,
        "ordering_holds": bool(fam.p_v <= lp.p_v and fam.s_bar <= lp.s_bar + 1e-9),
        "discarded": lp.discarded,
    }
    return doc, lp


def cmd_catalog(args):
    if args.export:
        doc = catalog.export_catalog(args.export)
    else:
        doc = catalog.export_catalog()
    doc["command"] = args.command
    return doc, None


def cmd_witness(args):
    scenario = parse_scenario(args.scenario)
    est = _run_estimate(args)
    doc = {
        "command": args.command,
        "state": args.state,
        "scenario": str(scenario),
        "detector": est.detector,
        "p_v": est.p_v,
        "stderr_p_v": est.stderr_p_v,
        "n_samples": est.n_samples,
        "seed": est.seed,
        "visibility": est.visibility,
        "discarded": est.discarded,
    }
    found = threshold_for(scenario)
    if found is None:
        doc.update(
            threshold=None,
            threshold_name=None,
            verdict="inconclusive",
            explanation=f"no two-producible threshold is tabulated for {scenario}",
        )
    else:
        name, value = found
        doc.update(threshold=value, threshold_name=name, verdict=witness_verdict(est.p_v, est.stderr_p_v, value))
    if tuple(scenario.settings) == (2, 2, 2, 2):
        doc["genuine_4_partite"] = {
            "threshold": GENUINE_4_PARTITE,
            "verdict": witness_verdict(est.p_v, est.stderr_p_v, GENUINE_4_PARTITE),
            "status": "conjectural",
            "explanation": "largest fraction among biproduct four-qubit states, supported numerically but unproven",
        }
    return doc, est


# ---------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text}")
    return value


def _visibility(text: str) -> float:
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"visibility must lie in [0, 1]: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocality", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_n, with_state=True):
        p.add_argument("--scenario", required=True, help="settings per party, e.g. 2x2x2")
        if with_state:
            p.add_argument("--state", required=True, help="catalog state name or amplitude file")
            p.add_argument("--v", type=_visibility, default=1.0, help="white-noise visibility")
        p.add_argument("--detector", default="iopt", help="'iopt', catalog inequality names joined by commas, or 'lp'")
        p.add_argument("--n", type=_positive_int, default=default_n)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=_positive_int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
        p.add_argument("--violation-epsilon", type=float, default=VIOLATION_EPS)
        p.add_argument("--output", type=Path)
        p.add_argument("--histogram-csv", type=Path)

    common(sub.add_parser("fraction", help="nonlocal fraction of a state"), mc.DEFAULT_SAMPLES)
    common(sub.add_parser("strength", help="strength average and histogram"), mc.DEFAULT_SAMPLES)
    common(sub.add_parser("typicality", help="averages over random pure states"), mc.DEFAULT_STATES, with_state=False)
    common(sub.add_parser("lp-check", help="compare a family detector with the exact LP"), 2000)
    common(sub.add_parser("witness", help="multipartite entanglement witness from the nonlocal fraction"), mc.DEFAULT_SAMPLES)
    cat = sub.add_parser("catalog", help="list or export cataloged states and inequalities")
    cat.add_argument("--export", type=Path)
    cat.add_argument("--output", type=Path)
    return parser


COMMANDS = {
    "fraction": cmd_fraction,
    "strength": cmd_strength,
    "typicality": cmd_typicality,
    "lp-check": cmd_lp_check,
    "catalog": cmd_catalog,
    "witness": cmd_witness,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        doc, est = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc["runtime_seconds"] = round(time.perf_counter() - start, 3)
    text = dumps(doc)
    sys.stdout.write(text)
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    hist = getattr(est, "histogram", None)
    if getattr(args, "histogram_csv", None) and hist is not None:
        write_histogram_csv(hist, args.histogram_csv)
    discarded = doc.get("discarded", 0)
    if discarded:
        print(f"warning: {discarded} samples discarded after LP failures", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
