"""
How nonlocal is a typical state?
================================

Average the nonlocal fraction over Haar-random pure states, one random
settings draw per state. The average climbs quickly with the number of qubits.
"""

from nonlocality import mc

for n_qubits, scenario in [(3, "2x2x2"), (4, "2x2x2x2"), (5, "2x2x2x2x2")]:
    est = mc.estimate_typicality(n_qubits, scenario, 20_000, "iopt", seed=5)
    print(f"N = {n_qubits}  T_V = {100 * est.t_v:6.2f}% +- {100 * est.stderr_t_v:.2f}   T_S = {est.t_s:.4f}")
