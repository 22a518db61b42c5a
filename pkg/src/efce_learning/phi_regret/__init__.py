from .deviations import (
    EFCCE,
    EFCE,
    MODES,
    RankOneUtility,
    TriggerProfile,
    TriggerSet,
    all_deviation_values,
    apply_coarse_deviation,
    apply_profile,
    apply_trigger_deviation,
    check_mode,
    deviation_value,
    local_utility_for_trigger,
    make_profile,
    trigger_set,
)
from .fixed_points import (
    FixedPointError,
    fixed_point,
    fixed_point_efce,
    fixed_point_efcce,
    fixed_point_residual,
    stationary_distribution,
)
from .psi import ALGORITHMS, GordonLearner, PsiMinimizer, default_eta_delta

__all__ = [
    "ALGORITHMS", "EFCCE", "EFCE", "FixedPointError", "GordonLearner", "MODES", "PsiMinimizer",
    "RankOneUtility", "TriggerProfile", "TriggerSet", "all_deviation_values",
    "apply_coarse_deviation", "apply_profile", "apply_trigger_deviation", "check_mode",
    "default_eta_delta", "deviation_value", "fixed_point", "fixed_point_efce",
    "fixed_point_efcce", "fixed_point_residual", "local_utility_for_trigger", "make_profile",
    "stationary_distribution", "trigger_set",
]
