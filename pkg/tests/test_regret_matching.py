import numpy as np
import pytest

from efce_learning.efg import Treeplex, best_response, build_index, load_game
from efce_learning.learners import (
    CFRLearner,
    RegretMatching,
    cfr_subtree_learner,
    external_regret,
    rm_plus_step,
    rm_step,
)
from oracles import pure_strategies


def test_rm_examples():
    assert np.allclose(rm_step(np.array([1.0, 3.0])), [0.25, 0.75])
    assert np.allclose(rm_step(np.array([-2.0, -1.0])), [0.5, 0.5])
    assert np.allclose(rm_plus_step(np.array([0.0, 2.0])), [0.0, 1.0])


def test_rm_plus_clamps_stored_regret():
    L = RegretMatching(2, plus=True, epsilon=0.0)
    x = L.next_strategy()
    assert np.allclose(x, [0.5, 0.5])
    # utilities (-0.3, 0.3): regrets would be (-0.3, 0.3)
    L.observe_utility(np.array([-0.3, 0.3]))
    assert np.allclose(L.regrets, [0.0, 0.3])
    R = RegretMatching(2, plus=False, epsilon=0.0)
    R.next_strategy()
    R.observe_utility(np.array([-0.3, 0.3]))
    assert np.allclose(R.regrets, [-0.3, 0.3])


def test_epsilon_mixing_keeps_output_positive():
    L = RegretMatching(3, epsilon=1e-12)
    L.next_strategy()
    L.observe_utility(np.array([1.0, 0.0, 0.0]))
    x = L.next_strategy()
    assert np.all(x > 0) and x.sum() == pytest.approx(1.0)


def test_single_infoset_cfr_equals_rm():
    rng = np.random.default_rng(0)
    for plus in (False, True):
        a = CFRLearner(Treeplex.simplex(3), plus=plus, epsilon=0.0)
        b = RegretMatching(3, plus=plus, epsilon=0.0)
        for _ in range(50):
            assert np.allclose(a.next_strategy(), b.next_strategy())
            u = rng.normal(size=3)
            a.observe_utility(u)
            b.observe_utility(u)


@pytest.mark.parametrize("rule", ["rm", "rm+"])
def test_constant_utility_converges_to_best_response(rule):
    ix = build_index(load_game("kuhn"), 0)
    j = ix.infoset_id("P0:1:")
    L = cfr_subtree_learner(ix, j, rule)
    rng = np.random.default_rng(1)
    u = rng.normal(size=L.domain.size)
    hist = []
    for _ in range(1000):
        x = L.next_strategy()
        hist.append((x, u))
        L.observe_utility(u)
    br, _ = best_response(ix, u, root=j)
    support = br > 0
    assert np.all(hist[-1][0][support] > 0.99)
    assert external_regret(hist, L.domain) / len(hist) < 0.01


@pytest.mark.parametrize("rule", ["rm", "rm+"])
def test_random_utilities_regret_bound(rule):
    ix = build_index(load_game("goofspiel:ranks=3"), 0)
    j = 0  # a root infoset with a depth-2 subtree
    assert len(ix.subtree_infosets[j]) > 1
    L = cfr_subtree_learner(ix, j, rule)
    D = L.domain
    rng = np.random.default_rng(2)
    T = 500
    hist = []
    for _ in range(T):
        x = L.next_strategy()
        u = rng.uniform(-1, 1, D.size)
        hist.append((x, u))
        L.observe_utility(u)
    norm = D.l1_norm
    assert external_regret(hist, D) <= 2 * norm * np.sqrt(T * D.size)


def test_external_regret_examples():
    ix = build_index(load_game("micro"), 0)
    u = np.array([0.0, 0.5, 0.1, 0.2, 0.9])
    br, _ = best_response(ix, u)
    assert external_regret([(br, u)], ix) == pytest.approx(0.0)
    x = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
    gap = 1.4 - float(x @ u)
    assert external_regret([(x, u)] * 7, ix) == pytest.approx(7 * gap)
    with pytest.raises(ValueError):
        external_regret([], ix)


def test_external_regret_matches_enumeration():
    ix = build_index(load_game("micro"), 0)
    pures = pure_strategies(ix)
    assert len(pures) == 4
    rng = np.random.default_rng(3)
    hist = []
    for _ in range(20):
        x = np.concatenate(([1.0], rng.dirichlet([1, 1]), rng.dirichlet([1, 1])))
        hist.append((x, rng.normal(size=5)))
    total = sum(u for _, u in hist)
    played = sum(float(x @ u) for x, u in hist)
    assert external_regret(hist, ix) == pytest.approx(max(float(p @ total) for p in pures) - played, abs=1e-12)
