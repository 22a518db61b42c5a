"""Regret matching (RM), RM+ and their CFR composition over treeplexes."""

from __future__ import annotations

import numpy as np

from .base import RegretMinimizer
from ..efg.sequence_form import PlayerTreeIndex, Treeplex

# Uniform mass mixed into every emitted strategy so that downstream fixed
# points see strictly positive inputs.
DEFAULT_EPSILON = 1e-12


def rm_step(regrets: np.ndarray) -> np.ndarray:
    """Strategy proportional to positive regrets; uniform when none is positive."""
    pos = np.maximum(np.asarray(regrets, dtype=float), 0.0)
    total = pos.sum()
    if total <= 0.0:
        return np.full(len(pos), 1.0 / len(pos))
    return pos / total


def rm_plus_step(regrets: np.ndarray) -> np.ndarray:
    # Stored RM+ regrets are already clamped, so the strategy map is the same.
    return rm_step(regrets)


def _mix(p: np.ndarray, epsilon: float) -> np.ndarray:
    if epsilon <= 0.0:
        return p
    return (1.0 - epsilon) * p + epsilon / len(p)


class RegretMatching(RegretMinimizer):
    def __init__(self, dim: int, plus: bool = False, epsilon: float = DEFAULT_EPSILON):
        if dim < 1:
            raise ValueError("regret matching needs at least one action")
        self.plus = plus
        self.epsilon = epsilon
        self.regrets = np.zeros(dim)
        self._x: np.ndarray | None = None

    def _next(self) -> np.ndarray:
        self._x = _mix(rm_step(self.regrets), self.epsilon)
        return self._x

    def _observe(self, u) -> None:
        u = np.asarray(u, dtype=float)
        self.regrets = self.regrets + (u - float(np.dot(self._x, u)))
        if self.plus:
            np.maximum(self.regrets, 0.0, out=self.regrets)


class CFRLearner(RegretMinimizer):
    """One RM/RM+ learner per infoset of a treeplex, combined through counterfactual values."""

    def __init__(self, domain: Treeplex, plus: bool = False, epsilon: float = DEFAULT_EPSILON):
        self.domain = domain
        self.plus = plus
        self.epsilon = epsilon
        self.regrets = np.zeros(domain.size)
        self._behavior: np.ndarray | None = None
        self._x: np.ndarray | None = None

    def _next(self) -> np.ndarray:
        D = self.domain
        behavior = np.empty(D.size)
        for k in range(D.num_infosets):
            s, e = D.starts[k], D.stops[k]
            behavior[s:e] = _mix(rm_step(self.regrets[s:e]), self.epsilon)
        self._behavior = behavior
        self._x = D.from_behavioral(behavior)
        return self._x

    def _observe(self, u) -> None:
        D = self.domain
        u = np.asarray(u, dtype=float)
        if u.shape != (D.size,):
            raise ValueError(f"utility has shape {u.shape}, expected ({D.size},)")
        cf = u.copy()
        for k in range(D.num_infosets - 1, -1, -1):
            s, e = D.starts[k], D.stops[k]
            value = float(np.dot(self._behavior[s:e], cf[s:e]))
            self.regrets[s:e] += cf[s:e] - value
            if self.plus:
                np.maximum(self.regrets[s:e], 0.0, out=self.regrets[s:e])
            if D.parents[k] >= 0:
                cf[D.parents[k]] += value


def cfr_subtree_learner(index: PlayerTreeIndex, j: int, rule: str = "rm", epsilon: float = DEFAULT_EPSILON) -> CFRLearner:
    """CFR learner over the subtree polytope rooted at infoset ``j``."""
    if rule not in ("rm", "rm+"):
        raise ValueError(f"unknown local rule {rule!r}")
    return CFRLearner(index.subtree_domain(j), plus=(rule == "rm+"), epsilon=epsilon)
