"""Regret minimization over trigger-deviation mixtures and the fixed-point wrapper.

``PsiMinimizer`` runs one learner per trigger over the trigger's subtree plus
one learner over the simplex of triggers, and outputs their mixture.
``GordonLearner`` turns it into a strategy learner by playing the fixed
point of each output mixture.
"""

from __future__ import annotations

import numpy as np

from .deviations import RankOneUtility, TriggerProfile, all_deviation_values, check_mode, trigger_set
from .fixed_points import fixed_point, fixed_point_residual
from ..efg.sequence_form import PlayerTreeIndex, Treeplex
from ..learners.base import RegretMinimizer
from ..learners.oftrl import LogBarrierOFTRL
from ..learners.regret_matching import DEFAULT_EPSILON, CFRLearner, RegretMatching

ALGORITHMS = ("lrl-oftrl", "cfr-rm", "cfr-rm+")


def default_eta_delta(index: PlayerTreeIndex, eta: float) -> float:
    return eta / (2 * index.num_sequences)


class PsiMinimizer(RegretMinimizer):
    """Learner over the convex hull of (coarse) trigger deviations of one player.

    Besides the learners it keeps the running sums needed to report the
    regret of the simplex learner, of each trigger learner, and of the
    composition, all measured on the realized utilities.
    """

    def __init__(self, index: PlayerTreeIndex, mode: str, algorithm: str = "lrl-oftrl",
                 eta: float = 1.0, eta_delta: float | None = None, epsilon: float = DEFAULT_EPSILON):
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
        self.index = index
        self.mode = check_mode(mode)
        self.algorithm = algorithm
        self.triggers = ts = trigger_set(index, self.mode)
        if ts.size == 0:
            raise ValueError(f"player {index.player} has no triggers")
        if algorithm == "lrl-oftrl":
            if not eta > 0:
                raise ValueError(f"eta must be positive, got {eta}")
            self.eta = float(eta)
            self.eta_delta = float(default_eta_delta(index, eta) if eta_delta is None else eta_delta)
            if not self.eta_delta > 0:
                raise ValueError(f"eta_delta must be positive, got {self.eta_delta}")
            self.local = [LogBarrierOFTRL(dom, self.eta) for dom in ts.domains]
            self.delta = LogBarrierOFTRL(Treeplex.simplex(ts.size), self.eta_delta)
        else:
            plus = algorithm == "cfr-rm+"
            self.eta = self.eta_delta = None
            self.local = [CFRLearner(dom, plus=plus, epsilon=epsilon) for dom in ts.domains]
            self.delta = RegretMatching(ts.size, plus=plus, epsilon=epsilon)

        self.rounds = 0
        self.delta_utility_sum = np.zeros(ts.size)
        self.delta_played = 0.0
        self.local_utility_sum = np.zeros(len(ts.flat_seqs))
        self.local_played = np.zeros(ts.size)
        self._profile: TriggerProfile | None = None

    @property
    def profile(self) -> TriggerProfile | None:
        return self._profile

    def _next(self) -> TriggerProfile:
        lam = np.asarray(self.delta.next_strategy(), dtype=float)
        qs = tuple(np.asarray(L.next_strategy(), dtype=float) for L in self.local)
        self._profile = TriggerProfile(self.mode, lam, qs)
        self._flat_q = self._profile.flat_continuations()
        return self._profile

    def _observe(self, util: RankOneUtility) -> None:
        ts = self.triggers
        values, flat_v = all_deviation_values(ts, self._flat_q, util)
        for k, L in enumerate(self.local):
            L.observe_utility(flat_v[ts.offsets[k]:ts.offsets[k + 1]])
        self.delta.observe_utility(values)

        self.rounds += 1
        self.delta_utility_sum += values
        self.delta_played += float(np.dot(self._profile.lam, values))
        self.local_utility_sum += flat_v
        self.local_played += np.add.reduceat(self._flat_q * flat_v, ts.offsets[:-1])

    def _local_best(self) -> np.ndarray:
        ts = self.triggers
        return np.array([
            dom.best_response(self.local_utility_sum[ts.offsets[k]:ts.offsets[k + 1]])[1]
            for k, dom in enumerate(ts.domains)
        ])

    def regrets(self) -> dict[str, object]:
        """Regrets so far: simplex learner, each trigger learner, and the composition."""
        best = self._local_best()
        local = best - self.local_played
        composed = float(np.max(self.delta_utility_sum - self.local_played + best)) - self.delta_played
        return {
            "delta": float(self.delta_utility_sum.max() - self.delta_played),
            "local": local,
            "composed": composed,
        }


class GordonLearner(RegretMinimizer):
    """Plays the fixed point of the deviation mixture proposed by a PsiMinimizer."""

    def __init__(self, psi: PsiMinimizer):
        self.psi = psi
        self.index = psi.index
        self.last_residual = 0.0
        self._x: np.ndarray | None = None

    def _next(self) -> np.ndarray:
        profile = self.psi.next_strategy()
        x = fixed_point(profile, self.index)
        self.last_residual = fixed_point_residual(profile, self.index, x)
        self._x = x
        return x

    def _observe(self, u) -> None:
        u = np.asarray(u, dtype=float)
        self.psi.observe_utility(RankOneUtility(u, self._x))
