"""
Noise robustness and entanglement witnessing
============================================

The nonlocal fraction falls as white noise is mixed in. States with only
two-party entanglement cannot exceed certain fractions, so a large enough
fraction certifies multipartite entanglement.
"""

import numpy as np

from nonlocality import catalog, cli, mc

psi = catalog.get_state("GHZ3")
# the same seed gives the same settings samples, so this curve is monotone
for v in np.linspace(0.6, 1.0, 9):
    est = mc.estimate_with_noise(psi, v, "2x2x2", 10_000, seed=3)
    print(f"v = {v:.2f}  P_V = {100 * est.p_v:6.2f}%")

for name, value in cli.THRESHOLDS.items():
    print(f"{name:6s} two-producible limit {100 * value:.2f}%")

for name, scenario in [("GHZ3", "2x2x2"), ("W4", "2x2x2x2"), ("GHZ2x00", "2x2x2x2")]:
    est = mc.estimate_nonlocal_fraction(catalog.get_state(name), scenario, 20_000, "iopt", seed=4)
    key, limit = cli.threshold_for(cli.parse_scenario(scenario))
    verdict = cli.witness_verdict(est.p_v, est.stderr_p_v, limit)
    print(f"{name:8s} {scenario:8s} P_V = {100 * est.p_v:6.2f}%  vs {key} {100 * limit:.2f}%  -> {verdict}")
