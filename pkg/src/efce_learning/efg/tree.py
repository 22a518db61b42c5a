"""Immutable extensive-form game trees.

Nodes are stored in a flat list in pre-order; node 0 is the root. Players are
numbered from 0. Chance is encoded with ``player == CHANCE``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

CHANCE = -1

_PROB_TOL = 1e-12


class InvalidGameError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    kind: str  # "chance", "decision" or "terminal"
    player: int = CHANCE
    infoset: str | None = None
    actions: tuple[str, ...] = ()
    children: tuple[int, ...] = ()
    probs: tuple[float, ...] = ()
    payoffs: tuple[float, ...] = ()

    @property
    def is_terminal(self) -> bool:
        return self.kind == "terminal"


# Nested description used by the game loaders before flattening:
#   ("terminal", payoffs)
#   ("chance", [(label, prob, subtree), ...])
#   ("decision", player, infoset_key, [(action, subtree), ...])
Spec = tuple


@dataclass(frozen=True)
class GameTree:
    name: str
    num_players: int
    nodes: tuple[Node, ...]
    payoff_scale: float = 1.0
    _terminals: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        _validate(self)
        terminals = tuple(k for k, n in enumerate(self.nodes) if n.is_terminal)
        object.__setattr__(self, "_terminals", terminals)

    @property
    def root(self) -> Node:
        return self.nodes[0]

    @property
    def terminals(self) -> tuple[int, ...]:
        return self._terminals

    def infoset_keys(self, player: int) -> list[str]:
        seen = {}
        for node in self.nodes:
            if node.kind == "decision" and node.player == player:
                seen.setdefault(node.infoset, None)
        return list(seen)

    def max_abs_payoff(self) -> float:
        return max(
            (max(abs(p) for p in self.nodes[z].payoffs) for z in self.terminals),
            default=0.0,
        )


def _validate(game: GameTree) -> None:
    nodes = game.nodes
    if not nodes:
        raise InvalidGameError("empty game tree")
    if game.num_players < 1:
        raise InvalidGameError("a game needs at least one player")

    parents = [-1] * len(nodes)
    infoset_owner: dict[str, int] = {}
    infoset_arity: dict[str, int] = {}
    for k, node in enumerate(nodes):
        if node.kind == "terminal":
            if len(node.payoffs) != game.num_players:
                raise InvalidGameError(f"terminal {k} has {len(node.payoffs)} payoffs")
            if any(not -1.0 <= p <= 1.0 for p in node.payoffs):
                raise InvalidGameError(f"terminal {k} payoff outside [-1, 1]")
            if node.children:
                raise InvalidGameError(f"terminal {k} has children")
            continue
        if not node.children or len(node.children) != len(node.actions):
            raise InvalidGameError(f"node {k} needs one child per action")
        if node.kind == "chance":
            if len(node.probs) != len(node.children):
                raise InvalidGameError(f"chance node {k} probabilities mismatch")
            if any(p < 0 for p in node.probs) or abs(sum(node.probs) - 1.0) > _PROB_TOL:
                raise InvalidGameError(f"chance node {k} probabilities do not sum to 1")
        elif node.kind == "decision":
            if not 0 <= node.player < game.num_players:
                raise InvalidGameError(f"node {k} owned by unknown player {node.player}")
            if node.infoset is None:
                raise InvalidGameError(f"decision node {k} has no infoset")
            owner = infoset_owner.setdefault(node.infoset, node.player)
            arity = infoset_arity.setdefault(node.infoset, len(node.actions))
            if owner != node.player or arity != len(node.actions):
                raise InvalidGameError(f"infoset {node.infoset!r} is inconsistent")
        else:
            raise InvalidGameError(f"node {k} has unknown kind {node.kind!r}")
        for c in node.children:
            if not k < c < len(nodes) or parents[c] != -1:
                raise InvalidGameError(f"node {k} has invalid child {c}")
            parents[c] = k
    if any(p == -1 for p in parents[1:]):
        raise InvalidGameError("tree is not connected")


def flatten(spec: Spec) -> list[Node]:
    """Turn a nested game description into a pre-order node list."""
    nodes: list[Node | None] = []

    def visit(s: Spec) -> int:
        k = len(nodes)
        nodes.append(None)
        kind = s[0]
        if kind == "terminal":
            nodes[k] = Node("terminal", payoffs=tuple(float(p) for p in s[1]))
        elif kind == "chance":
            children = tuple(visit(sub) for _, _, sub in s[1])
            nodes[k] = Node(
                "chance",
                actions=tuple(str(label) for label, _, _ in s[1]),
                children=children,
                probs=tuple(float(p) for _, p, _ in s[1]),
            )
        elif kind == "decision":
            _, player, key, branches = s
            children = tuple(visit(sub) for _, sub in branches)
            nodes[k] = Node(
                "decision",
                player=player,
                infoset=key,
                actions=tuple(str(a) for a, _ in branches),
                children=children,
            )
        else:
            raise InvalidGameError(f"unknown node kind {kind!r}")
        return k

    visit(spec)
    return nodes  # type: ignore[return-value]


def build_game(name: str, num_players: int, spec: Spec, normalize: bool = True) -> GameTree:
    """Flatten ``spec`` and (optionally) divide payoffs by the max |payoff|."""
    nodes = flatten(spec)
    scale = 1.0
    if normalize:
        raw = max(
            (abs(p) for n in nodes if n.is_terminal for p in n.payoffs), default=0.0
        )
        if raw > 0:
            scale = raw
            nodes = [
                Node("terminal", payoffs=tuple(p / raw for p in n.payoffs))
                if n.is_terminal
                else n
                for n in nodes
            ]
    return GameTree(name, num_players, tuple(nodes), payoff_scale=scale)


@dataclass(frozen=True)
class TerminalTable:
    """Per-terminal arrays used for vectorized utility evaluation.

    ``seqs[i, z]`` is the index of player i's last sequence before terminal z
    (0 for the empty sequence).
    """

    chance: np.ndarray
    payoffs: np.ndarray
    seqs: np.ndarray


def terminal_table(game: GameTree, seq_of_edge: Sequence[dict[tuple[int, int], int]]) -> TerminalTable:
    """Walk the tree once and record chance reach, payoffs, last sequences.

    ``seq_of_edge[i]`` maps (node, action index) of player i's decision nodes
    to that player's sequence index.
    """
    n = game.num_players
    chance, payoffs, seqs = [], [], []
    stack = [(0, 1.0, (0,) * n)]
    while stack:
        k, reach, last = stack.pop()
        node = game.nodes[k]
        if node.is_terminal:
            chance.append(reach)
            payoffs.append(node.payoffs)
            seqs.append(last)
            continue
        for a, c in reversed(list(enumerate(node.children))):
            if node.kind == "chance":
                stack.append((c, reach * node.probs[a], last))
            else:
                i = node.player
                nl = last[:i] + (seq_of_edge[i][(k, a)],) + last[i + 1:]
                stack.append((c, reach, nl))
    return TerminalTable(
        chance=np.asarray(chance, dtype=float),
        payoffs=np.asarray(payoffs, dtype=float).T.copy(),
        seqs=np.asarray(seqs, dtype=np.int64).T.copy(),
    )
