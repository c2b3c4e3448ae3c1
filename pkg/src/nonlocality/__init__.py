"""Nonlocal fraction and nonlocality strength of multiqubit states under random local measurements."""
from .catalog import get_inequality, get_state, inequality_names, state_names
from .ineq import (
    BellInequality,
    InequalityFamily,
    critical_visibility,
    evaluate,
    lifted_chsh_family,
    max_over_family,
    parse_inequality,
    symmetry_orbit,
)
from .mc import (
    Estimate,
    StrengthHistogram,
    TypicalityEstimate,
    estimate_nonlocal_fraction,
    estimate_strength,
    estimate_typicality,
    estimate_with_noise,
)
from .polytope import classical_bound, critical_visibility_lp, is_local, visibility_lp
from .qcore import (
    Behavior,
    BlochSetting,
    CorrelationTensor,
    Scenario,
    SettingsSample,
    behavior_from_born,
    behavior_from_correlations,
    correlation_tensor,
    mix_with_white_noise,
    random_pure_state,
    sample_setting,
)

__version__ = "0.1.0"
