"""Fixed points x = phi(x) of trigger-deviation mixtures.

Both solvers sweep the player's infosets top-down, so every parent sequence
is settled before the infosets hanging off it.
"""

from __future__ import annotations

import numpy as np

from .deviations import EFCCE, EFCE, TriggerProfile, apply_profile, check_mode, trigger_set
from ..efg.sequence_form import PlayerTreeIndex

STOCHASTIC_TOL = 1e-9
UNDERFLOW = 1e-300


class FixedPointError(ValueError):
    pass


def stationary_distribution(W: np.ndarray) -> np.ndarray:
    """Unique b on the simplex with W b = b for a positive column-stochastic W.

    Direct elimination in the Grassmann-Taksar-Heyman form: states are folded
    away one at a time using only off-diagonal sums, so no subtraction ever
    happens and tiny stationary masses keep full relative accuracy. That
    matters when a chain is close to reducible, as with the eps-mixed
    regret-matching iterates.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
        raise FixedPointError(f"expected a nonempty square matrix, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise FixedPointError("matrix has non-finite entries")
    if np.any(np.abs(W.sum(axis=0) - 1.0) > STOCHASTIC_TOL):
        raise FixedPointError("matrix is not column-stochastic")
    if np.any(W <= 0):
        raise FixedPointError("matrix has non-positive entries; the stationary distribution may not be unique")
    d = W.shape[0]
    if d == 1:
        return np.ones(1)
    P = W.T.copy()  # row-stochastic: P[a, b] = probability of moving a -> b
    for k in range(d - 1, 0, -1):
        out = P[k, :k].sum()
        P[:k, k] /= out
        P[:k, :k] += np.outer(P[:k, k], P[k, :k])
    b = np.zeros(d)
    b[0] = 1.0
    for k in range(1, d):
        b[k] = b[:k] @ P[:k, k]
    return b / b.sum()


def fixed_point_residual(profile: TriggerProfile, index: PlayerTreeIndex, x: np.ndarray) -> float:
    return float(np.max(np.abs(apply_profile(profile, index, x) - x)))


def _check_lambda(profile: TriggerProfile, size: int) -> np.ndarray:
    lam = np.asarray(profile.lam, dtype=float)
    if lam.shape != (size,):
        raise FixedPointError(f"lambda has shape {lam.shape}, expected ({size},)")
    if np.any(lam <= 0):
        raise FixedPointError("fixed point needs strictly positive lambda")
    return lam


def fixed_point_efcce(profile: TriggerProfile, index: PlayerTreeIndex) -> np.ndarray:
    """Fixed point of a coarse-trigger mixture.

    For each infoset j, x restricted to j's actions is the lambda-weighted
    average of the continuations of j and its ancestor infosets, each scaled
    by the mass of its own parent sequence.
    """
    if check_mode(profile.mode) != EFCCE:
        raise FixedPointError("profile is not in coarse (efcce) mode")
    ts = trigger_set(index, EFCCE)
    lam = _check_lambda(profile, ts.size)
    qs = profile.continuations
    x = np.zeros(index.num_sequences)
    x[0] = 1.0
    for j in range(index.num_infosets):
        anc = index.infoset_ancestors[j]
        acts = np.arange(index.infoset_start[j], index.infoset_stop[j])
        num = np.zeros(len(acts))
        den = 0.0
        for jp in anc:
            num += lam[jp] * qs[jp][ts.local_pos[jp, acts]] * x[index.infoset_parent[jp]]
            den += lam[jp]
        x[acts] = num / den
    return x


def efce_markov_matrix(profile: TriggerProfile, index: PlayerTreeIndex, x: np.ndarray, j: int, cum: np.ndarray) -> np.ndarray:
    """Column-stochastic matrix over the actions of infoset j.

    ``x`` must already be a fixed point on every infoset above j and ``cum[s]``
    is the lambda mass of all triggers on the path to sequence s.
    """
    ts = trigger_set(index, EFCE)
    lam = profile.lam
    qs = profile.continuations
    s0, s1 = int(index.infoset_start[j]), int(index.infoset_stop[j])
    acts = np.arange(s0, s1)
    parent = int(index.infoset_parent[j])
    xp = x[parent]
    if xp < UNDERFLOW:
        raise FixedPointError(f"parent sequence mass {xp:.3g} of infoset {index.infosets[j]!r} underflows")
    r = np.zeros(len(acts))
    for jp in index.infoset_ancestors[j][:-1]:
        for s in range(int(index.infoset_start[jp]), int(index.infoset_stop[jp])):
            k = s - 1
            r += lam[k] * qs[k][ts.local_pos[k, acts]] * x[s]
    own = np.array([qs[s - 1][ts.local_pos[s - 1, acts]] for s in acts]).T  # own[a_r, a_c]
    W = r[:, None] / xp + own * lam[acts - 1][None, :]
    W[np.diag_indices(len(acts))] += 1.0 - cum[acts]
    return W


def fixed_point_efce(profile: TriggerProfile, index: PlayerTreeIndex) -> np.ndarray:
    """Fixed point of a trigger mixture, one stationary distribution per infoset."""
    if check_mode(profile.mode) != EFCE:
        raise FixedPointError("profile is not in trigger (efce) mode")
    ts = trigger_set(index, EFCE)
    lam = _check_lambda(profile, ts.size)
    cum = index.succeq[:, 1:].astype(float) @ lam
    x = np.zeros(index.num_sequences)
    x[0] = 1.0
    for j in range(index.num_infosets):
        W = efce_markov_matrix(profile, index, x, j, cum)
        if np.any(W <= 0):
            raise FixedPointError(f"non-positive transition at infoset {index.infosets[j]!r}")
        b = stationary_distribution(W)
        s0, s1 = int(index.infoset_start[j]), int(index.infoset_stop[j])
        x[s0:s1] = x[index.infoset_parent[j]] * b
    return x


def fixed_point(profile: TriggerProfile, index: PlayerTreeIndex) -> np.ndarray:
    mode = check_mode(profile.mode)
    return fixed_point_efce(profile, index) if mode == EFCE else fixed_point_efcce(profile, index)
