import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compols.core import InvalidInputError, PolicyInterval, seeded_rng
from compols.learning import (ADAPTERS, Adapter, Exp3State, LearningRun, ParameterGrid,
                              compare_with_baseline, default_eta, exp3_select, exp3_update,
                              get_adapter, hedge_distribution, hedge_select, previous_best_select,
                              regime_of, regret_trace, run_learning)

IV = PolicyInterval(0.5, 2.0, 2.0, 2.0, 2.0, baseline=1.0)


def grid(K=5):
    return ParameterGrid.from_interval(IV, K)


def matrix_adapter():
    return Adapter("m", lambda phi: IV, lambda inst, p: inst[p], lambda M, s, r="stationary": [])


def test_grid_contains_baseline_and_stays_inside():
    g = grid(21)
    assert 1.0 in g.points and g.points[g.baseline_index] == 1.0
    assert all(p in IV for p in g.points)
    assert list(g.points) == sorted(g.points)


def test_grid_open_interval_and_integer():
    open_iv = PolicyInterval(0.0, 3.0, 5.0, 5.0, 5.0, baseline=1.0)
    g = ParameterGrid.from_interval(open_iv, 11)
    assert g.points[0] == pytest.approx(3e-3) and 1.0 in g.points
    ski = PolicyInterval(5, 20, 1.5, 1.5, 1.5, baseline=10, integer=True)
    g = ParameterGrid.from_interval(ski, 8)
    assert all(p == int(p) for p in g.points) and 10 in g.points


def test_grid_rejects_outside_points():
    with pytest.raises(InvalidInputError):
        ParameterGrid(IV, (0.1, 1.0), 2.0)


def test_hedge_examples():
    rng = seeded_rng(0)
    _, p = hedge_select([], 0.9, rng, K=4)
    assert p == pytest.approx(np.full(4, 0.25))
    _, p = hedge_select(np.full((10, 3), 0.4), 0.9, rng)
    assert p == pytest.approx(np.full(3, 1 / 3))
    past = np.zeros((50, 4))
    past[:, 2] = 1.0
    _, p = hedge_select(past, 0.9, rng)
    assert p[2] > 0.99
    with pytest.raises(InvalidInputError):
        hedge_select(np.full((2, 2), 1.5), 0.9, rng)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), st.floats(1e-3, 10))
def test_hedge_simplex(cum, eta):
    p = hedge_distribution(np.array(cum), eta)
    assert np.all(p >= 0) and abs(p.sum() - 1) <= 1e-12


def test_exp3_examples():
    rng = seeded_rng(1)
    s = Exp3State.start(1, 0.1)
    for _ in range(20):
        k, p = exp3_select(s, rng)
        assert k == 0
        s = exp3_update(s, k, 0.7, p[k])
    s = Exp3State.start(3, 0.2)
    for _ in range(20):
        k, p = exp3_select(s, rng)
        s = exp3_update(s, k, 0.0, p[k])
    assert s.distribution() == pytest.approx(np.full(3, 1 / 3))
    with pytest.raises(InvalidInputError):
        exp3_update(s, 0, 2.0, 0.5)


def test_exp3_two_arms():
    R = np.tile([1.0, 0.0], (2000, 1))
    iv = PolicyInterval(1.0, 2.0, 2.0, 1.0, 1.0, baseline=1.0)
    g = ParameterGrid(iv, (1.0, 2.0), 2.0)
    fracs = [np.mean(run_learning(None, [None] * 2000, g, "exp3", s, reward_matrix=R).chosen == 0)
             for s in range(20)]
    assert np.mean(fracs) > 0.9


def test_previous_best():
    g = grid(5)
    assert previous_best_select([], g) == g.baseline_index
    r = np.array([0.1, 0.2, 0.9, 0.2, 0.1])
    assert previous_best_select([r], g) == 2
    tie = np.full(5, 0.5)
    assert previous_best_select([tie], g) == g.baseline_index


def test_previous_best_identical_and_alternating():
    g = grid(5)
    row = np.array([0.2, 0.3, 0.5, 0.9, 0.1])
    run = run_learning(None, [None] * 6, g, "prevbest", reward_matrix=np.tile(row, (6, 1)))
    assert run.chosen[0] == g.baseline_index and all(run.chosen[1:] == run.best_fixed()[0])
    a, b = np.eye(5)[0], np.eye(5)[4]
    R = np.array([a, b] * 4)
    run = run_learning(None, [None] * 8, g, "prevbest", reward_matrix=R)
    assert list(run.chosen[1:]) == [0, 4, 0, 4, 0, 4, 0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from(["hedge", "exp3", "prevbest"]))
def test_run_invariants(seed, learner):
    rng = seeded_rng(seed)
    R = rng.random((40, 5))
    g = grid(5)
    run = run_learning(None, [None] * 40, g, learner, seed, reward_matrix=R)
    if learner != "prevbest":
        assert np.allclose(run.weights.sum(axis=1), 1, atol=1e-12)
    assert np.all(run.weights >= 0)
    assert np.array_equal(run.regret, regret_trace(R, run.chosen))
    assert all(p in g.interval for p in run.chosen_params)
    rows = run.table()
    assert len(rows) == 40 and rows[-1][4] == run.regret[-1]


def test_constant_reward_zero_regret():
    run = run_learning(None, [None] * 30, grid(5), "hedge", reward_matrix=np.full((30, 5), 0.6))
    assert np.allclose(run.regret, 0)


def test_alternating_regret_rate_decreases():
    M = 600
    R = np.zeros((M, 4))
    R[::2, 0] = 1.0
    R[1::2, 1] = 0.8
    R[:, 2] = 0.45
    g = ParameterGrid(PolicyInterval(1, 4, 2, 1, 1, baseline=1), (1.0, 2.0, 3.0, 4.0), 2)
    rates = np.mean([run_learning(None, [None] * M, g, "hedge", s, reward_matrix=R).regret
                     for s in range(10)], axis=0) / np.arange(1, M + 1)
    assert rates[-1] < rates[M // 4]


def test_unknown_learner():
    with pytest.raises(InvalidInputError):
        run_learning(None, [], grid(3), "ucb")


def test_compare_with_baseline():
    g = grid(5)
    R = np.tile([0.5, 0.6, 0.4, 0.8, 0.3], (10, 1))
    run = run_learning(None, [None] * 10, g, "prevbest", reward_matrix=R)
    cmp = compare_with_baseline(run, guarantee=4.0)
    assert cmp.wins == 9 and cmp.ties == 1 and cmp.losses == 0
    assert cmp.improvement == pytest.approx(1 - 1.25 / 2.5)


def test_regime_labels():
    assert [regime_of(t, "alternating") for t in range(4)] == [0, 1, 0, 1]
    assert regime_of(0, "two_regime") == 0 and regime_of(5, "two_regime") == 1
    with pytest.raises(InvalidInputError):
        regime_of(0, "chaos")


@pytest.mark.parametrize("name", sorted(ADAPTERS))
def test_adapters_produce_normalized_rewards(name):
    ad = get_adapter(name)
    phi = 1.5
    g = ParameterGrid.from_interval(ad.interval(phi), 5)
    stream = ad.stream(3, 0, "stationary")
    run = run_learning(ad, stream, g, "hedge", 0)
    assert np.all((run.rewards >= 0) & (run.rewards <= 1))
    assert all(p in g.interval for p in run.chosen_params)


def test_get_adapter_unknown():
    with pytest.raises(InvalidInputError):
        get_adapter("tsp")


def test_default_eta():
    assert default_eta(21, 500) == pytest.approx(math.sqrt(2 * math.log(21) / 500))
