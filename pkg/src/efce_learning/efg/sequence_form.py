"""Sequence-form machinery: per-player indices, treeplex domains, utilities.

Sequences of a player are numbered with 0 for the empty sequence and then
infoset by infoset in pre-order of first occurrence, so the parent sequence
of an infoset always has a smaller index than the infoset's own sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .tree import GameTree, TerminalTable, terminal_table


class PerfectRecallError(ValueError):
    def __init__(self, infoset: str, player: int):
        super().__init__(
            f"perfect recall violated at infoset {infoset!r} of player {player}"
        )
        self.infoset = infoset
        self.player = player


class Treeplex:
    """A sequence-form polytope in local coordinates.

    Infoset ``k`` owns coordinates ``starts[k]:stops[k]`` and its parent is the
    local coordinate ``parents[k]``; ``-1`` means the infoset hangs off the
    root, whose mass is fixed (1 for a strategy, lambda for a lifted point).
    Infosets are listed top-down.
    """

    def __init__(self, parents: Sequence[int], starts: Sequence[int], stops: Sequence[int]):
        self.parents = np.asarray(parents, dtype=np.int64)
        self.starts = np.asarray(starts, dtype=np.int64)
        self.stops = np.asarray(stops, dtype=np.int64)
        self.num_infosets = len(self.parents)
        self.size = int(self.stops.max()) if self.num_infosets else 0
        for k in range(self.num_infosets):
            if self.parents[k] >= self.starts[k]:
                raise ValueError("treeplex infosets must be listed top-down")
        self.coord_infoset = np.empty(self.size, dtype=np.int64)
        for k in range(self.num_infosets):
            self.coord_infoset[self.starts[k]:self.stops[k]] = k
        self.children: list[list[int]] = [[] for _ in range(self.size)]
        for k, p in enumerate(self.parents):
            if p >= 0:
                self.children[p].append(k)
        self.roots = [k for k in range(self.num_infosets) if self.parents[k] < 0]

    @classmethod
    def simplex(cls, d: int) -> "Treeplex":
        return cls([-1], [0], [d])

    @cached_property
    def constraints(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, b) with A y = b * mass describing the flow constraints."""
        A = np.zeros((self.num_infosets, self.size))
        b = np.zeros(self.num_infosets)
        for k in range(self.num_infosets):
            A[k, self.starts[k]:self.stops[k]] = 1.0
            if self.parents[k] >= 0:
                A[k, self.parents[k]] = -1.0
            else:
                b[k] = 1.0
        return A, b

    def uniform(self, mass: float = 1.0) -> np.ndarray:
        y = np.empty(self.size)
        for k in range(self.num_infosets):
            s, e, p = self.starts[k], self.stops[k], self.parents[k]
            y[s:e] = (mass if p < 0 else y[p]) / (e - s)
        return y

    def from_behavioral(self, behavior: np.ndarray, mass: float = 1.0) -> np.ndarray:
        """Push local action probabilities (one simplex per infoset) forward."""
        y = np.empty(self.size)
        for k in range(self.num_infosets):
            s, e, p = self.starts[k], self.stops[k], self.parents[k]
            y[s:e] = (mass if p < 0 else y[p]) * behavior[s:e]
        return y

    def flow_residual(self, y: np.ndarray, mass: float = 1.0) -> float:
        A, b = self.constraints
        if self.num_infosets == 0:
            return 0.0
        return float(np.max(np.abs(A @ y - b * mass)))

    def best_response(self, u: np.ndarray) -> tuple[np.ndarray, float]:
        """Vertex maximizing <y, u>; ties go to the lowest action index."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.size,):
            raise ValueError(f"utility has shape {u.shape}, expected ({self.size},)")
        values = np.zeros(self.num_infosets)
        choice = np.zeros(self.num_infosets, dtype=np.int64)
        below = np.zeros(self.size)
        for k in range(self.num_infosets - 1, -1, -1):
            s, e = self.starts[k], self.stops[k]
            totals = u[s:e] + below[s:e]
            a = int(np.argmax(totals))
            choice[k] = a
            values[k] = totals[a]
            if self.parents[k] >= 0:
                below[self.parents[k]] += values[k]
        vertex = np.zeros(self.size)
        for k in range(self.num_infosets):
            p = self.parents[k]
            if p < 0 or vertex[p] == 1.0:
                vertex[self.starts[k] + choice[k]] = 1.0
        return vertex, float(sum(values[k] for k in self.roots))

    @cached_property
    def l1_norm(self) -> float:
        return self.best_response(np.ones(self.size))[1]


@dataclass(frozen=True, eq=False)
class PlayerTreeIndex:
    player: int
    infosets: tuple[str, ...]
    infoset_parent: np.ndarray
    infoset_start: np.ndarray
    infoset_stop: np.ndarray
    seq_infoset: np.ndarray
    seq_labels: tuple[str, ...]
    seq_of_edge: dict = field(repr=False)

    @property
    def num_sequences(self) -> int:
        return len(self.seq_infoset)

    @property
    def num_infosets(self) -> int:
        return len(self.infosets)

    def infoset_id(self, key: str) -> int:
        return self.infosets.index(key)

    def infoset_actions(self, j: int) -> range:
        return range(int(self.infoset_start[j]), int(self.infoset_stop[j]))

    @cached_property
    def succeq(self) -> np.ndarray:
        """``succeq[s, t]`` is True when sequence s is t or lies below t."""
        n = self.num_sequences
        m = np.zeros((n, n), dtype=bool)
        m[0, 0] = True
        for s in range(1, n):
            parent = self.infoset_parent[self.seq_infoset[s]]
            m[s] = m[parent]
            m[s, s] = True
        return m

    def precedes(self, s: int, t: int) -> bool:
        """Strict precedence s < t between sequences."""
        return s != t and bool(self.succeq[t, s])

    @cached_property
    def infoset_ancestors(self) -> list[list[int]]:
        """Infosets j' with j' <= j (including j), listed top-down."""
        out: list[list[int]] = []
        for j in range(self.num_infosets):
            p = self.infoset_parent[j]
            out.append((out[self.seq_infoset[p]] if p > 0 else []) + [j])
        return out

    @cached_property
    def subtree_infosets(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_infosets)]
        for j, anc in enumerate(self.infoset_ancestors):
            for a in anc:
                out[a].append(j)
        return out

    @cached_property
    def subtree_seqs(self) -> list[np.ndarray]:
        return [
            np.concatenate([np.arange(self.infoset_start[k], self.infoset_stop[k]) for k in ks])
            for ks in self.subtree_infosets
        ]

    @cached_property
    def domain(self) -> Treeplex:
        """Q_i over the nonempty sequences (coordinate = sequence - 1)."""
        return Treeplex(self.infoset_parent - 1, self.infoset_start - 1, self.infoset_stop - 1)

    @cached_property
    def _subtree_domains(self) -> list[Treeplex]:
        out = []
        for j in range(self.num_infosets):
            seqs = self.subtree_seqs[j]
            pos = {int(s): k for k, s in enumerate(seqs)}
            ks = self.subtree_infosets[j]
            out.append(Treeplex(
                [-1 if k == j else pos[int(self.infoset_parent[k])] for k in ks],
                [pos[int(self.infoset_start[k])] for k in ks],
                [pos[int(self.infoset_start[k])] + self.infoset_stop[k] - self.infoset_start[k] for k in ks],
            ))
        return out

    def subtree_domain(self, j: int) -> Treeplex:
        return self._subtree_domains[j]

    @cached_property
    def depth(self) -> int:
        return max((len(a) for a in self.infoset_ancestors), default=0)

    @cached_property
    def max_actions(self) -> int:
        return int(np.max(self.infoset_stop - self.infoset_start, initial=0))

    @cached_property
    def l1_norm(self) -> float:
        """max ||q||_1 over Q_i, counting the empty sequence."""
        return 1.0 + self.domain.l1_norm


def build_index(game: GameTree, player: int) -> PlayerTreeIndex:
    if not 0 <= player < game.num_players:
        raise ValueError(f"game {game.name!r} has no player {player}")
    keys: list[str] = []
    ids: dict[str, int] = {}
    parent: list[int] = []
    start: list[int] = []
    stop: list[int] = []
    seq_infoset = [-1]
    labels = ["<empty>"]
    edge: dict[tuple[int, int], int] = {}
    stack = [(0, 0)]
    while stack:
        k, last = stack.pop()
        node = game.nodes[k]
        if node.is_terminal:
            continue
        if node.kind == "decision" and node.player == player:
            j = ids.get(node.infoset)
            if j is None:
                j = ids[node.infoset] = len(keys)
                keys.append(node.infoset)
                parent.append(last)
                start.append(len(seq_infoset))
                for a in node.actions:
                    seq_infoset.append(j)
                    labels.append(f"{node.infoset}/{a}")
                stop.append(len(seq_infoset))
            elif parent[j] != last:
                raise PerfectRecallError(node.infoset, player)
            for a in range(len(node.children)):
                edge[(k, a)] = start[j] + a
            for a in range(len(node.children) - 1, -1, -1):
                stack.append((node.children[a], start[j] + a))
        else:
            for c in reversed(node.children):
                stack.append((c, last))
    return PlayerTreeIndex(
        player=player,
        infosets=tuple(keys),
        infoset_parent=np.asarray(parent, dtype=np.int64),
        infoset_start=np.asarray(start, dtype=np.int64),
        infoset_stop=np.asarray(stop, dtype=np.int64),
        seq_infoset=np.asarray(seq_infoset, dtype=np.int64),
        seq_labels=tuple(labels),
        seq_of_edge=edge,
    )


def game_indices(game: GameTree) -> list[PlayerTreeIndex]:
    cache = _cache(game)
    if "indices" not in cache:
        cache["indices"] = [build_index(game, i) for i in range(game.num_players)]
    return cache["indices"]


def _terminals(game: GameTree) -> TerminalTable:
    cache = _cache(game)
    if "terminals" not in cache:
        cache["terminals"] = terminal_table(game, [ix.seq_of_edge for ix in game_indices(game)])
    return cache["terminals"]


_CACHES: dict[int, tuple[GameTree, dict]] = {}


def _cache(game: GameTree) -> dict:
    entry = _CACHES.get(id(game))
    if entry is None or entry[0] is not game:
        entry = _CACHES[id(game)] = (game, {})
    return entry[1]


def best_response(index: PlayerTreeIndex, u: np.ndarray, root: int | None = None) -> tuple[np.ndarray, float]:
    """Deterministic best response and its value.

    With ``root=None`` the utility covers all of Sigma_i (empty sequence
    included) and so does the returned vector. With ``root=j`` both are in the
    local coordinates of the subtree Sigma_j (``index.subtree_seqs[j]``).
    """
    u = np.asarray(u, dtype=float)
    if root is not None:
        return index.subtree_domain(root).best_response(u)
    if u.shape != (index.num_sequences,):
        raise ValueError(f"utility has shape {u.shape}, expected ({index.num_sequences},)")
    vertex, value = index.domain.best_response(u[1:])
    return np.concatenate(([1.0], vertex)), value + float(u[0])


def sequence_form_violation(index: PlayerTreeIndex, x: np.ndarray, root: int | None = None) -> float:
    """Largest violation of the root, flow and nonnegativity constraints."""
    x = np.asarray(x, dtype=float)
    if root is None:
        if x.shape != (index.num_sequences,):
            return np.inf
        flow = index.domain.flow_residual(x[1:], mass=x[0]) if index.num_infosets else 0.0
        return max(abs(x[0] - 1.0), flow, float(max(0.0, -x.min())))
    dom = index.subtree_domain(root)
    if x.shape != (dom.size,):
        return np.inf
    return max(dom.flow_residual(x), float(max(0.0, -x.min())))


def is_sequence_form(index: PlayerTreeIndex, x: np.ndarray, root: int | None = None, tol: float = 1e-9) -> bool:
    return sequence_form_violation(index, x, root) <= tol


def _check_profile(game: GameTree, profile: Sequence[np.ndarray | None], skip: int | None) -> list[np.ndarray | None]:
    if len(profile) != game.num_players:
        raise ValueError(f"profile has {len(profile)} entries for {game.num_players} players")
    out = []
    for i, (ix, x) in enumerate(zip(game_indices(game), profile)):
        if i == skip:
            out.append(None)
            continue
        x = np.asarray(x, dtype=float)
        if x.shape != (ix.num_sequences,):
            raise ValueError(
                f"strategy of player {i} has shape {x.shape}, expected ({ix.num_sequences},)"
            )
        out.append(x)
    return out


def utility_gradient(game: GameTree, player: int, profile: Sequence[np.ndarray | None]) -> np.ndarray:
    """u_i(x_{-i}): the vector whose inner product with x_i is i's expected utility.

    ``profile[player]`` is ignored and may be None.
    """
    xs = _check_profile(game, profile, skip=player)
    tab = _terminals(game)
    w = tab.payoffs[player] * tab.chance
    for i, x in enumerate(xs):
        if x is not None:
            w = w * x[tab.seqs[i]]
    n = game_indices(game)[player].num_sequences
    return np.bincount(tab.seqs[player], weights=w, minlength=n)


def utility_gradients(game: GameTree, profile: Sequence[np.ndarray]) -> list[np.ndarray]:
    """All players' utility gradients against the same profile."""
    xs = _check_profile(game, profile, skip=None)
    tab = _terminals(game)
    reach = [x[tab.seqs[i]] for i, x in enumerate(xs)]
    out = []
    for i, ix in enumerate(game_indices(game)):
        w = tab.payoffs[i] * tab.chance
        for k, r in enumerate(reach):
            if k != i:
                w = w * r
        out.append(np.bincount(tab.seqs[i], weights=w, minlength=ix.num_sequences))
    return out


def expected_utilities(game: GameTree, profile: Sequence[np.ndarray]) -> np.ndarray:
    xs = _check_profile(game, profile, skip=None)
    tab = _terminals(game)
    w = tab.chance.copy()
    for i, x in enumerate(xs):
        w = w * x[tab.seqs[i]]
    return tab.payoffs @ w
