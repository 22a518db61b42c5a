from __future__ import annotations

from typing import Iterable

import numpy as np

from ..efg.sequence_form import PlayerTreeIndex, Treeplex, best_response


class AlternationError(RuntimeError):
    """next_strategy / observe_utility called out of order."""


class RegretMinimizer:
    """Online learner with a strict next/observe alternation.

    Subclasses implement ``_next`` and ``_observe``.
    """

    _awaiting_utility = False

    def next_strategy(self):
        if self._awaiting_utility:
            raise AlternationError("next_strategy called twice without observe_utility")
        out = self._next()
        self._awaiting_utility = True
        return out

    def observe_utility(self, u) -> None:
        if not self._awaiting_utility:
            raise AlternationError("observe_utility called without a pending strategy")
        self._observe(u)
        self._awaiting_utility = False

    def _next(self):
        raise NotImplementedError

    def _observe(self, u) -> None:
        raise NotImplementedError


def external_regret(history: Iterable[tuple[np.ndarray, np.ndarray]], domain: PlayerTreeIndex | Treeplex) -> float:
    """max_{x*} sum_t <x*, u_t> - sum_t <x_t, u_t> over the domain.

    ``domain`` is either a player index (vectors over all of Sigma_i) or a
    treeplex in its own coordinates.
    """
    total_u = None
    played = 0.0
    for x, u in history:
        u = np.asarray(u, dtype=float)
        total_u = u.copy() if total_u is None else total_u + u
        played += float(np.dot(x, u))
    if total_u is None:
        raise ValueError("external regret of an empty history")
    if isinstance(domain, PlayerTreeIndex):
        best = best_response(domain, total_u)[1]
    else:
        best = domain.best_response(total_u)[1]
    return best - played
