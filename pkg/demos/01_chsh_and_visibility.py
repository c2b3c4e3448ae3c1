"""
CHSH violation and critical visibility
======================================

A maximally entangled pair measured along the optimal directions reaches
2 sqrt(2) on the CHSH expression. Mixing in white noise scales every
correlator, so the violation disappears at v = 1 / sqrt(2).
"""

import numpy as np

from nonlocality import catalog
from nonlocality.ineq import critical_visibility, evaluate, parse_inequality
from nonlocality.polytope import critical_visibility_lp
from nonlocality.qcore import SettingsSample, correlation_tensor

# inequalities are written "expression <= 0": the local bound 2 is folded in
chsh = parse_inequality("A0B0 + A0B1 + A1B0 - A1B1 - 2")

x = np.array([1.0, 0.0, 0.0])
z = np.array([0.0, 0.0, 1.0])
settings = SettingsSample((np.array([z, x]), np.array([(z + x), (z - x)]) / np.sqrt(2)))

psi = catalog.get_state("GHZ2")
t = correlation_tensor(psi, settings)
print("CHSH value minus bound:", evaluate(chsh, t), "expected", 2 * np.sqrt(2) - 2)

# the same threshold, once from the inequality and once from the full local polytope
print("v_crit from CHSH:", critical_visibility(chsh, t))
print("v_crit from LP:  ", critical_visibility_lp(psi, settings))
print("1/sqrt(2):       ", 1 / np.sqrt(2))
