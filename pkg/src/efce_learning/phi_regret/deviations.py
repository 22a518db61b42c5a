"""Trigger and coarse-trigger deviations applied through rank-one formulas.

A trigger deviation for sequence s = (j, a) with continuation q over the
subtree polytope of j maps a sequence-form vector x to

    (M x)[t] = x[t] * [t not below s] + q[t] * x[s] * [t in subtree(j)]

and a coarse trigger at infoset j uses the parent sequence of j instead of s
and resets the whole subtree. Continuations are stored in the local
coordinates of ``index.subtree_seqs[j]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..efg.sequence_form import PlayerTreeIndex

EFCE = "efce"
EFCCE = "efcce"
MODES = (EFCE, EFCCE)


def check_mode(mode: str) -> str:
    m = str(mode).lower()
    if m not in MODES:
        raise ValueError(f"unknown deviation mode {mode!r}; expected one of {MODES}")
    return m


class TriggerSet:
    """Layout of all triggers of one player for one mode.

    EFCE triggers are the nonempty sequences (trigger k is sequence k + 1);
    EFCCE triggers are the infosets. ``mass_seq[k]`` is the sequence whose
    probability activates trigger k and ``infoset[k]`` the infoset whose
    subtree gets replaced by the continuation.
    """

    def __init__(self, index: PlayerTreeIndex, mode: str):
        self.index = index
        self.mode = check_mode(mode)
        if self.mode == EFCE:
            seqs = np.arange(1, index.num_sequences)
            self.infoset = index.seq_infoset[seqs].copy()
            self.mass_seq = seqs
        else:
            self.infoset = np.arange(index.num_infosets)
            self.mass_seq = index.infoset_parent.copy()
        self.size = len(self.infoset)
        self.subtree = [index.subtree_seqs[j] for j in self.infoset]
        self.domains = [index.subtree_domain(j) for j in self.infoset]
        lengths = np.array([len(s) for s in self.subtree], dtype=np.int64)
        self.offsets = np.concatenate(([0], np.cumsum(lengths)))
        self.flat_seqs = np.concatenate(self.subtree) if self.size else np.zeros(0, dtype=np.int64)
        self.flat_owner = np.repeat(np.arange(self.size), lengths)

    @cached_property
    def replaced(self) -> np.ndarray:
        """replaced[t, k]: sequence t is overwritten by trigger k (float 0/1)."""
        n = self.index.num_sequences
        if self.mode == EFCE:
            return self.index.succeq[:, self.mass_seq].astype(float)
        m = np.zeros((n, self.size))
        for k, seqs in enumerate(self.subtree):
            m[seqs, k] = 1.0
        return m

    @cached_property
    def local_pos(self) -> np.ndarray:
        """local_pos[k, t]: coordinate of sequence t in trigger k's continuation, -1 if absent."""
        pos = np.full((self.size, self.index.num_sequences), -1, dtype=np.int64)
        for k, seqs in enumerate(self.subtree):
            pos[k, seqs] = np.arange(len(seqs))
        return pos

    def check_trigger(self, k: int) -> int:
        if not 0 <= k < self.size:
            raise ValueError(f"trigger {k} out of range for {self.size} {self.mode} triggers")
        return int(k)


_SETS: dict[tuple[int, str], tuple[PlayerTreeIndex, TriggerSet]] = {}


def trigger_set(index: PlayerTreeIndex, mode: str) -> TriggerSet:
    key = (id(index), check_mode(mode))
    entry = _SETS.get(key)
    if entry is None or entry[0] is not index:
        entry = _SETS[key] = (index, TriggerSet(index, mode))
    return entry[1]


@dataclass(frozen=True)
class RankOneUtility:
    """The matrix utility u (x) x kept as its two factors."""

    u: np.ndarray
    x: np.ndarray

    def dense(self) -> np.ndarray:
        return np.outer(self.u, self.x)


@dataclass(frozen=True)
class TriggerProfile:
    """A convex combination of trigger deviations.

    ``lam[k]`` weighs trigger k and ``continuations[k]`` is its continuation
    strategy in the local coordinates of its subtree.
    """

    mode: str
    lam: np.ndarray
    continuations: tuple[np.ndarray, ...]

    def flat_continuations(self) -> np.ndarray:
        return np.concatenate(self.continuations) if self.continuations else np.zeros(0)

    def validate(self, index: PlayerTreeIndex, tol: float = 1e-9) -> None:
        ts = trigger_set(index, self.mode)
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (ts.size,):
            raise ValueError(f"lambda has shape {lam.shape}, expected ({ts.size},)")
        if abs(lam.sum() - 1.0) > tol or np.any(lam <= 0):
            raise ValueError("lambda must be a strictly positive distribution")
        if len(self.continuations) != ts.size:
            raise ValueError("one continuation per trigger is required")
        for k, q in enumerate(self.continuations):
            dom = ts.domains[k]
            if np.shape(q) != (dom.size,) or dom.flow_residual(q) > tol or np.any(q <= 0):
                raise ValueError(f"continuation of trigger {k} is not a strictly positive subtree strategy")


def _trigger_index(index: PlayerTreeIndex, sigma_hat: int) -> int:
    if not 1 <= sigma_hat < index.num_sequences:
        raise ValueError(f"sequence {sigma_hat} is not a nonempty sequence of player {index.player}")
    return sigma_hat - 1


def _infoset_index(index: PlayerTreeIndex, j: int) -> int:
    if not 0 <= j < index.num_infosets:
        raise ValueError(f"infoset {j} does not belong to player {index.player}")
    return j


def _check_local(ts: TriggerSet, k: int, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (len(ts.subtree[k]),):
        raise ValueError(f"continuation has shape {q.shape}, expected ({len(ts.subtree[k])},)")
    return q


def _apply(ts: TriggerSet, k: int, q: np.ndarray, x: np.ndarray) -> np.ndarray:
    q = _check_local(ts, k, q)
    x = np.asarray(x, dtype=float)
    out = x * (1.0 - ts.replaced[:, k])
    out[ts.subtree[k]] += q * x[ts.mass_seq[k]]
    return out


def apply_trigger_deviation(index: PlayerTreeIndex, sigma_hat: int, q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply the trigger deviation (sigma_hat -> q) to x.

    ``sigma_hat`` is a nonempty sequence index of the player.
    """
    ts = trigger_set(index, EFCE)
    return _apply(ts, _trigger_index(index, sigma_hat), q, x)


def apply_coarse_deviation(index: PlayerTreeIndex, j: int, q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply the coarse trigger deviation (infoset j -> q) to x."""
    ts = trigger_set(index, EFCCE)
    return _apply(ts, _infoset_index(index, j), q, x)


def _value(ts: TriggerSet, k: int, q: np.ndarray, util: RankOneUtility) -> float:
    q = _check_local(ts, k, q)
    xu = util.x * util.u
    kept = float(xu.sum() - np.dot(xu, ts.replaced[:, k]))
    seqs = ts.subtree[k]
    return kept + float(util.x[ts.mass_seq[k]]) * float(np.dot(q, util.u[seqs]))


def deviation_value(index: PlayerTreeIndex, mode: str, trigger: int, q: np.ndarray, util: RankOneUtility) -> float:
    """<M x, u> without forming M.

    ``trigger`` is a nonempty sequence for EFCE and an infoset for EFCCE.
    """
    mode = check_mode(mode)
    ts = trigger_set(index, mode)
    k = _trigger_index(index, trigger) if mode == EFCE else _infoset_index(index, trigger)
    return _value(ts, k, q, util)


def local_utility_for_trigger(index: PlayerTreeIndex, mode: str, trigger: int, util: RankOneUtility) -> np.ndarray:
    """The part of u (x) x that a trigger's continuation interacts with, over its subtree."""
    mode = check_mode(mode)
    ts = trigger_set(index, mode)
    k = _trigger_index(index, trigger) if mode == EFCE else _infoset_index(index, trigger)
    return float(util.x[ts.mass_seq[k]]) * util.u[ts.subtree[k]]


def all_deviation_values(ts: TriggerSet, flat_q: np.ndarray, util: RankOneUtility) -> tuple[np.ndarray, np.ndarray]:
    """Deviation values and local utilities of every trigger at once.

    Returns ``(values, flat_local_utilities)``; the second array lines up
    with ``ts.flat_seqs``.
    """
    x, u = util.x, util.u
    xu = x * u
    kept = xu.sum() - xu @ ts.replaced
    mass = x[ts.mass_seq]
    flat_v = mass[ts.flat_owner] * u[ts.flat_seqs]
    inner = np.add.reduceat(flat_q * u[ts.flat_seqs], ts.offsets[:-1]) if ts.size else np.zeros(0)
    return kept + mass * inner, flat_v


def apply_profile(profile: TriggerProfile, index: PlayerTreeIndex, x: np.ndarray) -> np.ndarray:
    """phi(x) for the lambda-mixture of trigger deviations in ``profile``."""
    ts = trigger_set(index, profile.mode)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(profile.lam, dtype=float)
    out = x * (lam.sum() - ts.replaced @ lam)
    weights = (lam * x[ts.mass_seq])[ts.flat_owner]
    np.add.at(out, ts.flat_seqs, weights * profile.flat_continuations())
    return out


def make_profile(index: PlayerTreeIndex, mode: str, lam: Sequence[float], continuations: Sequence[np.ndarray]) -> TriggerProfile:
    profile = TriggerProfile(check_mode(mode), np.asarray(lam, dtype=float), tuple(np.asarray(q, dtype=float) for q in continuations))
    profile.validate(index)
    return profile
