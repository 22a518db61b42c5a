"""Benchmark games: Kuhn poker, Goofspiel, Sheriff and a two-infoset toy game.

All loaders return trees whose payoffs were divided by the largest absolute
raw payoff of the instance, so every stored payoff lies in [-1, 1].
"""

from __future__ import annotations

import itertools
from math import factorial

from .tree import GameTree, build_game


class UnknownGameError(ValueError):
    pass


def micro() -> GameTree:
    """Two-player toy game with two root infosets for player 0.

    Chance picks left/right uniformly. Player 1 then picks l/r at a singleton
    infoset (S on the left, R on the right) and player 0, who saw chance but
    not player 1, picks 1/2 (infoset A, left) or 3/4 (infoset B, right).
    Player 0's sequences are therefore (empty, 1, 2, 3, 4).
    """
    left = {
        ("l", "1"): (1.0, -1.0), ("l", "2"): (-1.0, 1.0),
        ("r", "1"): (-1.0, 1.0), ("r", "2"): (1.0, -1.0),
    }
    right = {
        ("l", "3"): (0.5, 0.5), ("l", "4"): (0.0, 1.0),
        ("r", "3"): (1.0, 0.0), ("r", "4"): (-0.5, -0.5),
    }

    def side(p1_infoset, p0_infoset, actions, table):
        return ("decision", 1, p1_infoset, [
            (b, ("decision", 0, p0_infoset, [
                (a, ("terminal", table[(b, a)])) for a in actions
            ]))
            for b in ("l", "r")
        ])

    spec = ("chance", [
        ("left", 0.5, side("S", "A", ("1", "2"), left)),
        ("right", 0.5, side("R", "B", ("3", "4"), right)),
    ])
    return build_game("micro", 2, spec)


def kuhn(players: int = 2, ranks: int = 3) -> GameTree:
    """Kuhn poker with ``players`` players and a deck of ``ranks`` cards.

    Everybody antes 1. Players act in turn and may check or bet 1 until
    somebody bets; after a bet, each remaining player in turn order folds or
    calls. The best card among the non-folded players takes the pot.
    """
    if players < 2:
        raise ValueError("Kuhn poker needs at least two players")
    if ranks < players:
        raise ValueError(f"not enough ranks: {ranks} cards for {players} players")

    deals = list(itertools.permutations(range(ranks), players))
    prob = 1.0 / len(deals)

    def showdown(cards, contrib, active):
        winner = max(active, key=lambda i: cards[i])
        pot = sum(contrib)
        return tuple(
            (pot - contrib[i]) if i == winner else -contrib[i] for i in range(players)
        )

    def betting(cards, history, actor, contrib, bettor, folded):
        if bettor is None:
            if actor == players:
                return ("terminal", showdown(cards, contrib, range(players)))
            branches = [
                ("c", betting(cards, history + "c", actor + 1, contrib, None, folded)),
                ("b", betting(cards, history + "b", (actor + 1) % players,
                              contrib[:actor] + (contrib[actor] + 1,) + contrib[actor + 1:],
                              actor, folded)),
            ]
        else:
            if actor == bettor:
                active = [i for i in range(players) if i not in folded]
                return ("terminal", showdown(cards, contrib, active))
            nxt = (actor + 1) % players
            branches = [
                ("f", betting(cards, history + "f", nxt, contrib, bettor, folded | {actor})),
                ("c", betting(cards, history + "c", nxt,
                              contrib[:actor] + (contrib[actor] + 1,) + contrib[actor + 1:],
                              bettor, folded)),
            ]
        return ("decision", actor, f"P{actor}:{cards[actor]}:{history}", branches)

    spec = ("chance", [
        ("".join(map(str, d)), prob, betting(d, "", 0, (1,) * players, None, frozenset()))
        for d in deals
    ])
    return build_game(f"kuhn:players={players},ranks={ranks}", players, spec)


def goofspiel(ranks: int = 3) -> GameTree:
    """Two-player Goofspiel with ``ranks`` cards per deck.

    Chance fixes the prize order at the root; prizes are revealed one per
    round. Moves within a round are sequential with player 1 not seeing
    player 0's card; both cards are revealed afterwards. The final round is
    forced (one card left) and is played out automatically. Ties discard the
    prize; each player's payoff is the total value of the prizes won.
    """
    if ranks < 2:
        raise ValueError("Goofspiel needs at least two ranks")
    cards = tuple(range(1, ranks + 1))
    orders = list(itertools.permutations(cards))
    prob = 1.0 / factorial(ranks)

    def score(order, plays):
        s = [0, 0]
        for prize, (a, b) in zip(order, plays):
            if a > b:
                s[0] += prize
            elif b > a:
                s[1] += prize
        return tuple(s)

    def play(order, plays):
        k = len(plays)
        hands = [
            tuple(c for c in cards if c not in [p[i] for p in plays]) for i in (0, 1)
        ]
        if k == ranks - 1:
            plays = plays + ((hands[0][0], hands[1][0]),)
            return ("terminal", score(order, plays))
        seen = ",".join(map(str, order[:k + 1]))
        past = ",".join(f"{a}{b}" for a, b in plays)
        view = f"{seen}|{past}"
        return ("decision", 0, f"P0:{view}", [
            (str(a), ("decision", 1, f"P1:{view}", [
                (str(b), play(order, plays + ((a, b),))) for b in hands[1]
            ]))
            for a in hands[0]
        ])

    spec = ("chance", [
        ("".join(map(str, o)), prob, play(o, ())) for o in orders
    ])
    return build_game(f"goofspiel:ranks={ranks}", 2, spec)


def sheriff(v: int = 5, p: int = 1, s: int = 1, mmax: int = 5, bmax: int = 2, rounds: int = 2) -> GameTree:
    """Sheriff bargaining game (player 0 = smuggler, player 1 = sheriff).

    The smuggler loads m <= mmax illegal items in secret. In each round the
    smuggler offers a bribe b <= bmax and the sheriff accepts or rejects;
    only the last round is binding. An accepted final bribe pays the smuggler
    p*m - b and the sheriff b. After a rejected final bribe the sheriff
    inspects or not: no inspection pays the smuggler v*m; an inspection finds
    m > 0 items (smuggler pays p*m to the sheriff) or finds nothing (sheriff
    pays s to the smuggler).
    """
    if rounds < 1:
        raise ValueError("Sheriff needs at least one bargaining round")
    if min(v, p, s, mmax, bmax) < 0:
        raise ValueError("Sheriff parameters must be nonnegative")

    def final(m, b, accepted, inspect):
        if accepted:
            return (p * m - b, b)
        if not inspect:
            return (v * m, 0)
        if m > 0:
            return (-p * m, p * m)
        return (s, -s)

    def bargain(m, history):
        k = len(history)
        public = ",".join(f"{b}{'a' if acc else 'r'}" for b, acc in history)
        branches = []
        for b in range(bmax + 1):
            sheriff_key = f"sheriff:{public}|{b}"
            if k == rounds - 1:
                sub = ("decision", 1, sheriff_key, [
                    ("accept", ("terminal", final(m, b, True, False))),
                    ("reject", ("decision", 1, f"{sheriff_key}|rejected", [
                        ("pass", ("terminal", final(m, b, False, False))),
                        ("inspect", ("terminal", final(m, b, False, True))),
                    ])),
                ])
            else:
                sub = ("decision", 1, sheriff_key, [
                    ("accept", bargain(m, history + ((b, True),))),
                    ("reject", bargain(m, history + ((b, False),))),
                ])
            branches.append((str(b), sub))
        return ("decision", 0, f"smuggler:{m}|{public}", branches)

    spec = ("decision", 0, "smuggler:load", [
        (str(m), bargain(m, ())) for m in range(mmax + 1)
    ])
    name = f"sheriff:v={v},p={p},s={s},mmax={mmax},bmax={bmax},rounds={rounds}"
    return build_game(name, 2, spec)


_LOADERS = {
    "micro": (micro, {}),
    "kuhn": (kuhn, {"players": 2, "ranks": 3}),
    "goofspiel": (goofspiel, {"ranks": 3}),
    "sheriff": (sheriff, {"v": 5, "p": 1, "s": 1, "mmax": 5, "bmax": 2, "rounds": 2}),
}


def parse_game_spec(text: str) -> tuple[str, dict[str, int]]:
    """``"kuhn:players=3,ranks=3"`` -> ``("kuhn", {"players": 3, "ranks": 3})``."""
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    if name not in _LOADERS:
        raise UnknownGameError(f"unknown game {name!r}; choose from {sorted(_LOADERS)}")
    defaults = _LOADERS[name][1]
    params = dict(defaults)
    for item in filter(None, (t.strip() for t in rest.split(","))):
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq or key not in defaults:
            raise ValueError(f"bad parameter {item!r} for game {name!r}")
        try:
            params[key] = int(value)
        except ValueError:
            raise ValueError(f"parameter {key!r} must be an integer, got {value!r}") from None
    return name, params


def load_game(spec: str, **params) -> GameTree:
    """Load a benchmark game from a spec string, e.g. ``"sheriff:rounds=1"``.

    Keyword arguments override parameters given in the string.
    """
    name, parsed = parse_game_spec(spec)
    unknown = set(params) - set(_LOADERS[name][1])
    if unknown:
        raise ValueError(f"bad parameters {sorted(unknown)} for game {name!r}")
    parsed.update(params)
    return _LOADERS[name][0](**parsed)
