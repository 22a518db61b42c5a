from .base import AlternationError, RegretMinimizer, external_regret
from .oftrl import (
    LiftedPoint,
    LogBarrierOFTRL,
    OftrlState,
    SolverError,
    kkt_residual,
    lift_utility,
    lrl_oftrl_step,
)
from .regret_matching import CFRLearner, RegretMatching, cfr_subtree_learner, rm_plus_step, rm_step

__all__ = [
    "AlternationError", "CFRLearner", "LiftedPoint", "LogBarrierOFTRL", "OftrlState",
    "RegretMatching", "RegretMinimizer", "SolverError", "cfr_subtree_learner",
    "external_regret", "kkt_residual", "lift_utility", "lrl_oftrl_step", "rm_plus_step",
    "rm_step",
]
