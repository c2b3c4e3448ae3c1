"""
Nonlocal fraction of three-qubit states
=======================================

Draw random measurement directions for every party and count how often the
statistics violate at least one inequality of a family. The lifted CHSH family
already catches most of what the exact LP test finds.
"""

from nonlocality import catalog, mc

n = 20_000
for name in ["GHZ3", "W3"]:
    psi = catalog.get_state(name)
    for detector in ["iopt", "I_5", "MABK3", "iopt,I_5,I_6"]:
        est = mc.estimate_strength(psi, "2x2x2", n, detector, seed=1)
        print(f"{name:5s} {detector:14s} P_V = {100 * est.p_v:6.2f}% +- {100 * est.stderr_p_v:.2f}   S_bar = {est.s_bar:.4f}")

# the LP detector is exact but slower; a small run on the same seed gives paired samples
lp = mc.estimate_strength(catalog.get_state("GHZ3"), "2x2x2", 2000, "lp", seed=1)
fam = mc.estimate_strength(catalog.get_state("GHZ3"), "2x2x2", 2000, "iopt", seed=1)
print(f"paired 2000 samples: LP {100 * lp.p_v:.2f}% vs I_opt {100 * fam.p_v:.2f}%")

# strength histogram as a coarse text plot (bins of 0.005, mass sums to P_V)
est = mc.estimate_strength(catalog.get_state("GHZ3"), "2x2x2", n, "iopt", seed=1)
bins = est.histogram.bins
for k in range(0, 64, 4):
    mass = bins[k : k + 4].sum()
    print(f"S in [{k * 0.005:.2f}, {(k + 4) * 0.005:.2f})  {'#' * int(mass * 400)}")
print("total mass", est.histogram.total_mass, "== P_V", est.p_v)
