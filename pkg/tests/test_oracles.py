import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compols.core import DensityBounds, InfeasibleError, InvalidInputError, KnapsackItem, OkpInstance, seeded_rng
from compols.eac import EvRequest
from compols.okp import ThresholdCurve, okp_run, okp_uniform_instance
from compols.oracles import (EXACT, FRACTIONAL_UPPER_BOUND, GREEDY_LOWER_BOUND, eac_exhaustive,
                             eac_fractional_opt, eac_greedy, edf_feasible, fractional_knapsack,
                             knapsack_bruteforce, knapsack_dp, set_cover_bruteforce,
                             set_cover_exact, set_cover_greedy)
from compols.osc import SetSystem

B = DensityBounds(1.0, 10.0)


def okp(items):
    return OkpInstance(B, [KnapsackItem(v, w) for v, w in items], 1.0)


def test_fractional_examples():
    assert fractional_knapsack(okp([(1, 0.2), (2, 0.3)])).value == 3
    r = fractional_knapsack(OkpInstance(DensityBounds(1, 2), [KnapsackItem(2, 1), KnapsackItem(1, 1)]))
    assert r.value == 2 and r.kind == FRACTIONAL_UPPER_BOUND
    assert fractional_knapsack(okp([(2, 0.6), (1, 0.8)])).value == pytest.approx(2 + 0.4 / 0.8)


def test_dp_examples():
    assert knapsack_dp(okp([])).value == 0
    r = knapsack_dp(okp([(3, 0.4)]))
    assert r.value == 3 and r.kind == EXACT


def random_items(rng, n, discretize):
    w = rng.uniform(0.05, 0.5, n)
    if discretize:
        w = np.round(w, 4)
    d = rng.uniform(1, 10, n)
    return okp(list(zip(d * w, w)))


@pytest.mark.parametrize("discretize", [True, False])
def test_dp_matches_bruteforce(discretize):
    rng = seeded_rng(2)
    for _ in range(15):
        inst = random_items(rng, 10, discretize)
        exact = knapsack_dp(inst).value
        assert exact == pytest.approx(knapsack_bruteforce(inst), abs=1e-9)
        frac = fractional_knapsack(inst).value
        assert exact - 1e-9 <= frac <= exact + max(i.value for i in inst.items) + 1e-9


def test_dp_refuses_large_undiscretizable():
    rng = seeded_rng(0)
    inst = random_items(rng, 45, False)
    with pytest.raises(InvalidInputError):
        knapsack_dp(inst)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.3, 4))
def test_oracle_chain_dominates_online(seed, alpha):
    rng = seeded_rng(seed)
    inst = okp_uniform_instance(B, 30, rng, weight_cap=0.1)
    inst = OkpInstance(B, [KnapsackItem(i.value, round(i.weight, 4)) for i in inst.items], 0.1)
    alg = okp_run(ThresholdCurve(B, alpha), inst).alg_value
    dp = knapsack_dp(inst).value
    assert fractional_knapsack(inst).value >= dp - 1e-9 >= alg - 2e-9


def test_set_cover_examples():
    sys = SetSystem.from_sets(6, [{0, 1, 2, 3}, {4}, {5}])
    assert set_cover_exact(sys, {0, 1, 2}).value == 1
    singles = SetSystem.from_sets(5, [{i} for i in range(5)])
    assert set_cover_exact(singles, set(range(5))).value == 5
    assert set_cover_greedy(singles, set(range(5))).value == 5
    assert set_cover_greedy(sys, {0, 1}).value == 1


def test_set_cover_infeasible():
    sys = SetSystem.from_sets(3, [{0}])
    with pytest.raises(InfeasibleError):
        set_cover_exact(sys, {0, 2})
    with pytest.raises(InfeasibleError):
        set_cover_greedy(sys, {1})


def test_set_cover_chain():
    rng = seeded_rng(4)
    for trial in range(50):
        n, m = 12, 14
        sets = [set(np.flatnonzero(rng.random(n) < 0.25).tolist()) for _ in range(m)]
        for e in range(n):
            if not any(e in s for s in sets):
                sets[int(rng.integers(m))].add(e)
        sys = SetSystem.from_sets(n, sets)
        t = set(range(n))
        ex = set_cover_exact(sys, t)
        gr = set_cover_greedy(sys, t)
        assert ex.value == set_cover_bruteforce(sys, t)
        assert ex.value <= gr.value <= (1 + math.log(n)) * ex.value
        covered = set().union(*(sys.membership[k] for k in ex.witness))
        assert t <= covered and len(ex.witness) == ex.value


def test_eac_opt_examples():
    reqs = [EvRequest(0, 1, 0.3, 1.0), EvRequest(1, 2, 0.4, 2.0)]
    assert eac_fractional_opt(reqs, 3).value == pytest.approx(3.0)
    assert eac_fractional_opt([], 2).value == 0.0


def test_eac_single_slot_reduces_to_fractional_knapsack():
    rng = seeded_rng(8)
    e = rng.uniform(0.05, 0.3, 12)
    v = e * rng.uniform(1, 10, 12)
    reqs = [EvRequest(0, 0, float(a), float(b)) for a, b in zip(e, v)]
    lp = eac_fractional_opt(reqs, 1).value
    assert lp == pytest.approx(fractional_knapsack(okp(zip(v, e))).value, rel=1e-9)


def test_greedy_is_not_an_upper_bound():
    reqs = [EvRequest(0, 1, 1.0, 2.0), EvRequest(0, 0, 1.0, 1.0)]
    g = eac_greedy(reqs, 2)
    assert g.kind == GREEDY_LOWER_BOUND
    assert g.value == pytest.approx(2.5)
    assert eac_exhaustive(reqs, 2).value == 3.0
    assert eac_fractional_opt(reqs, 2).value == pytest.approx(3.0)


def random_requests(rng, k, horizon):
    out = []
    for _ in range(k):
        a = int(rng.integers(0, horizon))
        d = int(rng.integers(a, horizon))
        e = float(rng.uniform(0.1, 0.7))
        out.append(EvRequest(a, d, e, e * float(rng.uniform(1, 10))))
    return out


def test_eac_lp_dominates_exhaustive():
    rng = seeded_rng(6)
    for _ in range(25):
        reqs = random_requests(rng, 8, 3)
        lp = eac_fractional_opt(reqs, 3).value
        ex = eac_exhaustive(reqs, 3).value
        assert ex - 1e-9 <= lp <= ex + max(r.value for r in reqs) + 1e-9
        assert eac_greedy(reqs, 3).value <= lp + 1e-9


def test_eac_capacity_exceeds_demand():
    reqs = [EvRequest(0, 2, 0.2, 1.0), EvRequest(1, 2, 0.2, 0.5)]
    assert eac_fractional_opt(reqs, 3).value == pytest.approx(1.5)


def test_edf_feasible():
    assert edf_feasible([EvRequest(0, 1, 1.5, 1)], 2)
    assert not edf_feasible([EvRequest(0, 0, 0.6, 1), EvRequest(0, 0, 0.6, 1)], 1)
    assert edf_feasible([EvRequest(0, 1, 1.0, 1), EvRequest(0, 0, 1.0, 1)], 2)
