import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efce_learning.efg import Treeplex, build_index, load_game
from efce_learning.learners import (
    AlternationError,
    LiftedPoint,
    LogBarrierOFTRL,
    OftrlState,
    SolverError,
    external_regret,
    kkt_residual,
    lift_utility,
    lrl_oftrl_step,
)
from efce_learning.learners import oftrl


def _objective(S, eta, lam, y):
    return eta * (S[0] * lam + S[1:] @ y) + np.log(lam) + np.log(y).sum()


def test_lift_utility_examples():
    assert np.allclose(lift_utility(np.zeros(2), np.array([0.5, 0.5])), 0.0)
    assert np.allclose(lift_utility(np.array([1.0, 0.0]), np.array([0.5, 0.5])), [-0.5, 1.0, 0.0])
    with pytest.raises(ValueError):
        lift_utility(np.zeros(3), np.zeros(2))


def test_lifted_utility_vanishes_on_ray():
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = int(rng.integers(1, 6))
        u = rng.normal(size=d)
        x = rng.dirichlet(np.ones(d))
        lam = rng.uniform(0.01, 1.0)
        assert lift_utility(u, x) @ np.concatenate(([lam], lam * x)) == pytest.approx(0.0, abs=1e-12)


def test_barrier_center_on_simplex():
    for d in (1, 2, 3, 5):
        p = lrl_oftrl_step(OftrlState.initial(Treeplex.simplex(d), 1.0))
        assert p.lam == 1.0
        assert np.allclose(p.y, 1.0 / d)


def test_zero_prediction_grid_oracle_d2():
    # S = 0: the objective (d+1) log(lam) + log(y1) + log(y2) over the lifted 2-simplex
    grid = np.linspace(0.01, 1.0, 100)
    best = max(
        ((3 * np.log(l) + np.log(l * a) + np.log(l * (1 - a)) - 2 * np.log(l)), l, a)
        for l in grid for a in np.linspace(0.01, 0.99, 99)
    )
    assert best[1] == 1.0 and best[2] == pytest.approx(0.5)
    p = lrl_oftrl_step(OftrlState.initial(Treeplex.simplex(2), 1.0))
    assert (p.lam, *p.y) == pytest.approx((1.0, 0.5, 0.5))


def test_single_action_is_a_point():
    L = LogBarrierOFTRL(Treeplex.simplex(1), 1.0)
    for u in (5.0, -3.0, 0.1):
        assert np.allclose(L.next_strategy(), [1.0])
        L.observe_utility(np.array([u]))


def test_determinism():
    D = build_index(load_game("kuhn"), 0).domain
    rng = np.random.default_rng(1)
    S = rng.normal(size=D.size + 1)
    a = lrl_oftrl_step(OftrlState(D, 1.0, S, np.zeros_like(S)))
    b = lrl_oftrl_step(OftrlState(D, 1.0, S, np.zeros_like(S)))
    assert a.lam == b.lam and np.array_equal(a.y, b.y)


def _random_state(rng, D):
    S = rng.normal(size=D.size + 1) * rng.choice([0.1, 1.0, 10.0, 100.0])
    S[0] -= abs(S[0]) * rng.choice([0.0, 1.0, 10.0])
    return S


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), spec=st.sampled_from(["micro", "kuhn", "goofspiel:ranks=3"]))
def test_step_is_kkt_optimal_and_interior(seed, spec):
    rng = np.random.default_rng(seed)
    D = build_index(load_game(spec), 0).domain
    S = _random_state(rng, D)
    p = lrl_oftrl_step(OftrlState(D, 1.0, S, np.zeros_like(S)))
    assert 0 < p.lam <= 1.0
    assert np.all(p.y > 0)
    assert D.flow_residual(p.y, mass=p.lam) <= 1e-9
    assert kkt_residual(D, S, 1.0, p) <= 1e-10


def test_step_beats_random_feasible_points():
    rng = np.random.default_rng(2)
    D = build_index(load_game("kuhn"), 0).domain
    for _ in range(20):
        S = _random_state(rng, D)
        p = lrl_oftrl_step(OftrlState(D, 1.0, S, np.zeros_like(S)))
        f_star = _objective(S, 1.0, p.lam, p.y)
        for _ in range(50):
            lam = rng.uniform(0.01, 1.0)
            beh = np.concatenate([rng.dirichlet(np.ones(e - s)) for s, e in zip(D.starts, D.stops)])
            y = D.from_behavioral(beh, mass=lam)
            assert _objective(S, 1.0, lam, y) <= f_star + 1e-9


def test_warm_start_agrees_with_cold_start():
    rng = np.random.default_rng(3)
    D = build_index(load_game("kuhn"), 0).domain
    for _ in range(20):
        S = _random_state(rng, D)
        cold = lrl_oftrl_step(OftrlState(D, 1.0, S, np.zeros_like(S)))
        warm_seed = LiftedPoint(0.5, 0.5 * D.uniform())
        warm = lrl_oftrl_step(OftrlState(D, 1.0, S, np.zeros_like(S), warm_start=warm_seed))
        assert warm.lam == pytest.approx(cold.lam, abs=1e-9)
        assert np.allclose(warm.y, cold.y, atol=1e-9)


def test_kkt_residual_flags_wrong_points():
    D = Treeplex.simplex(3)
    S = np.array([0.0, 1.0, 0.0, -1.0])
    assert kkt_residual(D, S, 1.0, LiftedPoint(1.0, np.full(3, 1 / 3))) > 1e-3
    assert kkt_residual(D, S, 1.0, LiftedPoint(1.0, np.array([1.0, 0.0, 0.0]))) == np.inf


def test_non_convergence_raises(monkeypatch):
    monkeypatch.setattr(oftrl, "NEWTON_MAX_ITER", 1)
    D = build_index(load_game("kuhn"), 0).domain
    S = np.linspace(-50, 50, D.size + 1)
    with pytest.raises(SolverError):
        lrl_oftrl_step(OftrlState(D, 1.0, S, np.zeros_like(S)))


def test_bad_eta():
    with pytest.raises(ValueError):
        OftrlState.initial(Treeplex.simplex(2), 0.0)


def test_alternation_enforced():
    L = LogBarrierOFTRL(Treeplex.simplex(2), 1.0)
    with pytest.raises(AlternationError):
        L.observe_utility(np.zeros(2))
    L.next_strategy()
    with pytest.raises(AlternationError):
        L.next_strategy()
    L.observe_utility(np.zeros(2))
    with pytest.raises(AlternationError):
        L.observe_utility(np.zeros(2))


def test_multiplicative_stability_and_rvu_on_treeplex():
    ix = build_index(load_game("kuhn"), 0)
    D = ix.domain
    norm = ix.l1_norm
    eta = 1.0 / (256 * norm)
    L = LogBarrierOFTRL(D, eta)
    rng = np.random.default_rng(4)
    T = 300
    xs, us = [], []
    prev = None
    for t in range(T):
        x = L.next_strategy()
        if prev is not None:
            assert np.max(np.abs(1 - x / prev)) <= 100 * eta * norm
        prev = x
        u = rng.uniform(-1, 1, D.size)
        L.observe_utility(u)
        xs.append(x)
        us.append(u)
    reg = external_regret(zip(xs, us), D)
    variation = sum(np.max(np.abs(us[t + 1] - us[t])) ** 2 for t in range(T - 1))
    bound = 2 * ix.num_sequences * np.log(T) / eta + 16 * eta * norm**2 * variation
    assert max(0.0, reg) <= bound


def test_regret_sublinear_against_fixed_utility():
    D = Treeplex.simplex(3)
    L = LogBarrierOFTRL(D, 1.0)
    u = np.array([0.0, 1.0, 0.5])
    hist = []
    for _ in range(500):
        hist.append((L.next_strategy(), u))
        L.observe_utility(u)
    # each losing action keeps mass about 1 / (eta * t * gap), so it costs about
    # 1 / t per round and the two losers add about 2 log 2 per doubling of t
    assert external_regret(hist, D) <= (D.size + 1) * np.log(len(hist))
    assert external_regret(hist, D) - external_regret(hist[:250], D) < 2 * np.log(2) + 0.05
    assert hist[-1][0][1] > 0.99
