"""Hindsight regret evaluation and the synchronous learning loop."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .efg.sequence_form import PlayerTreeIndex, best_response, game_indices, utility_gradients
from .efg.tree import GameTree
from .phi_regret.deviations import EFCE, check_mode, trigger_set
from .phi_regret.psi import ALGORITHMS, GordonLearner, PsiMinimizer, default_eta_delta


def _correlation(strategies: np.ndarray, utilities: np.ndarray) -> np.ndarray:
    return np.asarray(strategies, dtype=float).T @ np.asarray(utilities, dtype=float)


def trigger_regrets_from_correlation(G: np.ndarray, index: PlayerTreeIndex, mode: str) -> np.ndarray:
    """Best hindsight gain of every trigger from G = sum_t outer(x_t, u_t).

    Entry k is max over continuations q of sum_t <M_k,q x_t, u_t> - <x_t, u_t>.
    """
    ts = trigger_set(index, mode)
    diag = np.diag(G)
    baseline = diag @ ts.replaced
    out = np.empty(ts.size)
    for k in range(ts.size):
        w = G[ts.mass_seq[k], ts.subtree[k]]
        out[k] = ts.domains[k].best_response(w)[1] - baseline[k]
    return out


def trigger_regret_from_history(strategies: np.ndarray, utilities: np.ndarray, index: PlayerTreeIndex, mode: str) -> float:
    """Regret against the best single (coarse) trigger deviation in hindsight.

    By linearity the best mixture of triggers is attained at a single trigger.
    """
    strategies = np.asarray(strategies, dtype=float)
    if strategies.ndim != 2 or len(strategies) == 0:
        raise ValueError("trigger regret of an empty history")
    return float(trigger_regrets_from_correlation(_correlation(strategies, utilities), index, check_mode(mode)).max())


def external_regret_from_history(strategies: np.ndarray, utilities: np.ndarray, index: PlayerTreeIndex) -> float:
    strategies = np.asarray(strategies, dtype=float)
    utilities = np.asarray(utilities, dtype=float)
    if strategies.ndim != 2 or len(strategies) == 0:
        raise ValueError("external regret of an empty history")
    total = utilities.sum(axis=0)
    return best_response(index, total)[1] - float(np.einsum("ts,ts->", strategies, utilities))


def gap_from_regrets(regrets: Sequence[float], horizons: Sequence[int]) -> float:
    """max_i max(0, regret_i) / T; every player must share the same T."""
    if len(regrets) != len(horizons) or not regrets:
        raise ValueError("one regret and one horizon per player are required")
    if len(set(int(t) for t in horizons)) != 1:
        raise ValueError(f"mismatched horizons {list(horizons)}")
    T = int(horizons[0])
    if T < 1:
        raise ValueError("horizon must be positive")
    return max(max(0.0, float(r)) for r in regrets) / T


@dataclass
class DynamicsLog:
    config: dict
    strategies: list[np.ndarray]
    utilities: list[np.ndarray]
    checkpoints: list[int]
    records: list[dict] = field(default_factory=list)
    fixed_point_residuals: np.ndarray | None = None
    stability: dict | None = None
    local_regrets: list[np.ndarray] | None = None
    final_trigger_regrets: list[float] | None = None
    wall_clock: float = 0.0

    @property
    def num_players(self) -> int:
        return len(self.strategies)

    @property
    def T(self) -> int:
        return len(self.strategies[0]) if self.strategies else 0

    def final_records(self) -> list[dict]:
        last = self.checkpoints[-1]
        return [r for r in self.records if r["t"] == last]


def trigger_regret(log: DynamicsLog, player: int, index: PlayerTreeIndex, mode: str | None = None, T: int | None = None) -> float:
    """Trigger (EFCE) or coarse-trigger (EFCCE) regret of ``player`` over the first T rounds."""
    mode = check_mode(mode or log.config["mode"])
    T = log.T if T is None else T
    return trigger_regret_from_history(log.strategies[player][:T], log.utilities[player][:T], index, mode)


def external_regret_of_log(log: DynamicsLog, player: int, index: PlayerTreeIndex, T: int | None = None) -> float:
    T = log.T if T is None else T
    return external_regret_from_history(log.strategies[player][:T], log.utilities[player][:T], index)


def equilibrium_gap(log: DynamicsLog, indices: Sequence[PlayerTreeIndex], mode: str | None = None) -> float:
    """Distance of the empirical correlated play from (coarse) EFCE: max_i max(0, Reg_i) / T."""
    if len(indices) != log.num_players:
        raise ValueError("one index per player is required")
    horizons = [len(s) for s in log.strategies]
    regrets = [
        trigger_regret_from_history(log.strategies[i], log.utilities[i], ix, mode or log.config["mode"])
        for i, ix in enumerate(indices)
    ]
    return gap_from_regrets(regrets, horizons)


def default_checkpoints(T: int) -> list[int]:
    out = []
    t = 1
    while t < T:
        out.append(t)
        t *= 2
    out.append(T)
    return out


def _rank_one_delta(u1, x1, u0, x0) -> float:
    """max |u1 x1^T - u0 x0^T| entrywise."""
    return float(np.max(np.abs(np.outer(u1, x1) - np.outer(u0, x0))))


def _max_ratio_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.max(np.abs(1.0 - new / old)))


def _per_player(value, n: int, name: str) -> list[float]:
    if np.isscalar(value):
        return [float(value)] * n
    out = [float(v) for v in value]
    if len(out) != n:
        raise ValueError(f"one {name} per player is required")
    return out


def run_dynamics(game: GameTree, algorithm: str = "lrl-oftrl", mode: str = EFCE, T: int = 100,
                 eta: float | Sequence[float] = 1.0, eta_delta: float | Sequence[float] | None = None,
                 seed: int | None = None,
                 checkpoints: Sequence[int] | None = None, track_stability: bool = False,
                 game_spec: str | None = None) -> DynamicsLog:
    """Every player runs a fixed-point learner over its deviation set, synchronously.

    At each round all players commit to strategies, then each observes the
    gradient of its utility at the others' current strategies. The learners
    are deterministic; ``seed`` is recorded but not needed.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    mode = check_mode(mode)
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    T = int(T)
    checkpoints = default_checkpoints(T) if checkpoints is None else sorted(set(int(c) for c in checkpoints))
    if not checkpoints or checkpoints[0] < 1 or checkpoints[-1] > T:
        raise ValueError(f"checkpoints must lie in [1, {T}]")

    indices = game_indices(game)
    n = game.num_players
    etas = _per_player(eta, n, "eta")
    if any(not e > 0 for e in etas):
        raise ValueError(f"eta must be positive, got {eta}")
    if eta_delta is None:
        eta_deltas = [default_eta_delta(ix, e) for ix, e in zip(indices, etas)]
    else:
        eta_deltas = _per_player(eta_delta, n, "eta_delta")

    psis = [PsiMinimizer(ix, mode, algorithm, e, ed) for ix, e, ed in zip(indices, etas, eta_deltas)]
    learners = [GordonLearner(p) for p in psis]

    strategies = [np.empty((T, ix.num_sequences)) for ix in indices]
    utilities = [np.empty((T, ix.num_sequences)) for ix in indices]
    residuals = np.empty((T, n))
    G = [np.zeros((ix.num_sequences, ix.num_sequences)) for ix in indices]
    records: list[dict] = []

    stab = None
    if track_stability:
        stab = {
            "local_ratio": np.zeros((T, n)),
            "delta_ratio": np.zeros((T, n)),
            "utility_variation": np.zeros((T, n)),
        }
        prev_profiles: list = [None] * n

    cp = set(checkpoints)
    start = time.perf_counter()
    for t in range(T):
        xs = [L.next_strategy() for L in learners]
        us = utility_gradients(game, xs)
        for i, L in enumerate(learners):
            L.observe_utility(us[i])
            strategies[i][t] = xs[i]
            utilities[i][t] = us[i]
            residuals[t, i] = L.last_residual
            G[i] += np.outer(xs[i], us[i])
            if stab is not None:
                prof = psis[i].profile
                old = prev_profiles[i]
                if old is not None:
                    stab["local_ratio"][t, i] = max(
                        _max_ratio_change(q1, q0) for q1, q0 in zip(prof.continuations, old.continuations)
                    )
                    stab["delta_ratio"][t, i] = _max_ratio_change(prof.lam, old.lam)
                    stab["utility_variation"][t, i] = _rank_one_delta(us[i], xs[i], utilities[i][t - 1], strategies[i][t - 1])
                prev_profiles[i] = prof
        if t + 1 in cp:
            for i, ix in enumerate(indices):
                trig = float(trigger_regrets_from_correlation(G[i], ix, mode).max())
                ext = best_response(ix, utilities[i][:t + 1].sum(axis=0))[1] - float(np.trace(G[i]))
                inner = psis[i].regrets()
                records.append({
                    "t": t + 1,
                    "player": i,
                    "trigger_regret": trig,
                    "external_regret": ext,
                    "avg_regret": trig / (t + 1),
                    "delta_regret": inner["delta"],
                    "local_regret_pos_sum": float(np.maximum(inner["local"], 0.0).sum()),
                    "local_regret_max": float(inner["local"].max()),
                    "composed_regret": inner["composed"],
                })
    wall = time.perf_counter() - start
    local_regrets = [p.regrets()["local"] for p in psis]
    final_trigger = [float(trigger_regrets_from_correlation(G[i], ix, mode).max()) for i, ix in enumerate(indices)]

    config = {
        "game": game_spec or game.name,
        "algorithm": algorithm,
        "mode": mode,
        "T": T,
        "eta": etas[0] if np.isscalar(eta) else etas,
        "eta_delta": eta_deltas if algorithm == "lrl-oftrl" else None,
        "seed": seed,
        "checkpoints": list(checkpoints),
    }
    return DynamicsLog(
        config=config,
        strategies=strategies,
        utilities=utilities,
        checkpoints=list(checkpoints),
        records=records,
        fixed_point_residuals=residuals,
        stability=stab,
        local_regrets=local_regrets,
        final_trigger_regrets=final_trigger,
        wall_clock=wall,
    )
