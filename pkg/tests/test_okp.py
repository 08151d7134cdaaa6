import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compols.core import DensityBounds, InvalidInputError, KnapsackItem, OkpInstance
from compols.okp import (ADMIT, REJECT, OkpState, ThresholdCurve, df_gamma_table, df_table,
                         lambert_alpha_low, okp_cr, okp_df, okp_phi_class, okp_run, okp_step,
                         okp_uniform_instance, okp_worst_case, psi, psi_array, psi_integral,
                         threshold_table)

E_CURVE = ThresholdCurve(DensityBounds(1.0, math.e), 1.0)


def test_psi_examples():
    assert E_CURVE.bounds.T == 0.5
    assert psi(E_CURVE, 0.25) == 1.0
    assert psi(E_CURVE, 1.0) == math.inf
    assert psi(E_CURVE, 0.75) == pytest.approx(math.exp(0.5), abs=1e-12)


@pytest.mark.parametrize("z", [-0.1, 1.5])
def test_psi_domain(z):
    with pytest.raises(InvalidInputError):
        psi(E_CURVE, z)


def test_alpha_must_be_positive():
    with pytest.raises(InvalidInputError):
        ThresholdCurve.from_gamma(20, 0.0)


@given(st.floats(1.01, 1e4), st.floats(0.01, 20))
def test_psi_shape(gamma, alpha):
    c = ThresholdCurve.from_gamma(gamma, alpha)
    zs = np.linspace(0, 1, 400, endpoint=False)
    v = psi_array(c, zs)
    assert np.all(np.diff(v) >= 0)
    assert v.min() >= 1.0 and v.max() <= gamma * (1 + 1e-12)
    assert psi(c, c.bounds.T) == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(v, [psi(c, z) for z in zs], rtol=1e-12)


@given(st.floats(1.5, 100), st.floats(0.1, 10), st.floats(0, 0.999))
def test_psi_integral(gamma, alpha, z):
    from scipy.integrate import quad
    c = ThresholdCurve.from_gamma(gamma, alpha)
    pts = [p for p in (c.bounds.T, c.saturation_point()) if p < z]
    ref, _ = quad(lambda u: psi(c, u), 0, z, points=pts or None, limit=200)
    assert psi_integral(c, z) == pytest.approx(ref, rel=1e-7, abs=1e-10)


def test_step_examples():
    s0 = OkpState()
    d, s = okp_step(E_CURVE, s0, KnapsackItem(math.e * 1e-3, 1e-3))
    assert d == ADMIT and s.z == 1e-3
    assert okp_step(E_CURVE, OkpState(1.0), KnapsackItem(math.e * 1e-3, 1e-3))[0] == REJECT
    assert okp_step(E_CURVE, OkpState(0.75), KnapsackItem(1.5e-3, 1e-3))[0] == REJECT


def test_step_admits_at_zero_pseudo_utility():
    d, _ = okp_step(E_CURVE, OkpState(0.1), KnapsackItem(1e-3, 1e-3))
    assert d == ADMIT


def test_step_rejects_overflow():
    assert okp_step(E_CURVE, OkpState(0.998), KnapsackItem(2.718e-3, 1e-3))[0] == ADMIT
    assert okp_step(E_CURVE, OkpState(0.998), KnapsackItem(2.718e-2, 1e-2))[0] == REJECT


def test_run_single_item():
    b = DensityBounds(1.0, 20.0)
    r = okp_run(ThresholdCurve(b, 1.0), OkpInstance(b, [KnapsackItem(1e-3, 1e-3)]))
    assert r.decisions == [ADMIT] and r.alg_value == 1e-3 and r.ratio == 1.0


def test_run_flat_segment_ratio_one(b20):
    n = 200
    w = b20.T / n
    inst = OkpInstance(b20, [KnapsackItem(w, w)] * n)
    r = okp_run(ThresholdCurve(b20, 1.0), inst)
    assert all(d == ADMIT for d in r.decisions)
    assert r.ratio == pytest.approx(1.0, abs=1e-12)


def test_run_rejects_invalid_instance(b20):
    with pytest.raises(InvalidInputError):
        okp_run(ThresholdCurve(b20, 1.0), OkpInstance(b20, [KnapsackItem(1.0, 1e-3)]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.2, 5))
def test_run_invariants(seed, alpha):
    from compols.core import seeded_rng
    b = DensityBounds(1.0, 30.0)
    c = ThresholdCurve(b, alpha)
    inst = okp_uniform_instance(b, 400, seeded_rng(seed), weight_cap=0.01)
    state = OkpState()
    for it in inst.items:
        z0 = state.z
        d, state = okp_step(c, state, it)
        assert z0 <= state.z <= 1.0
        if d == ADMIT:
            assert it.density >= psi(c, z0) - 1e-12
        elif z0 + it.weight <= 1.0:
            assert it.density < psi(c, z0)
    assert okp_run(c, inst).ratio >= 1 - 1e-12


def test_df_examples():
    assert okp_df(20, 1) == 1.0
    assert okp_df(20, 2) == pytest.approx(40 / 21, abs=1e-12)
    assert okp_df(20, 0.5) == pytest.approx(10 / (math.sqrt(20) - 0.5), abs=1e-12)
    assert okp_cr(20, 1) == pytest.approx(math.log(20) + 1)


def test_df_shape():
    for g in (2.0, 5.0, 20.0, 1000.0):
        lo = np.linspace(1e-3, 1, 2000)
        hi = np.linspace(1, 50, 2000)
        d_lo = np.array([okp_df(g, a) for a in lo])
        d_hi = np.array([okp_df(g, a) for a in hi])
        assert np.all(np.diff(d_lo) < 0)
        assert np.all(np.diff(d_hi) > 0)
        assert okp_df(g, 1 - 1e-9) == pytest.approx(1.0, abs=1e-6)
        assert np.all(d_lo[:-1] > 1) and np.all(d_hi[1:] > 1)


def test_df_sublinear_in_gamma():
    r = [okp_df(g, 0.1) / g for g in (10, 1e2, 1e3, 1e4)]
    assert all(a > b for a, b in zip(r, r[1:]))


def test_phi_class_examples():
    c = okp_phi_class(20, 1)
    assert (c.lo, c.hi) == (1.0, 1.0)
    c = okp_phi_class(20, 2)
    assert c.hi == pytest.approx(19 / 9, abs=1e-12)
    assert c.lo == pytest.approx(0.63624, abs=1e-4)


@pytest.mark.parametrize("phi", [1.2, 1.5, 2, 3])
def test_phi_class_lambert_crosscheck(phi):
    c = okp_phi_class(20, phi)
    assert c.extra["lambert_discrepancy"] < 1e-6
    assert c.extra["lambert_branch"] == -1


@given(st.floats(1.5, 500), st.floats(0, 1))
def test_phi_class_soundness(gamma, frac):
    phi = 1 + frac * (gamma * 0.99 - 1)
    if phi == 1:
        return
    c = okp_phi_class(gamma, phi)
    assert okp_df(gamma, c.hi) == pytest.approx(phi, rel=1e-6)
    assert okp_df(gamma, c.hi * (1 + 1e-4)) > phi
    if c.lo > 0:
        assert okp_df(gamma, c.lo) == pytest.approx(phi, rel=1e-6)
        assert okp_df(gamma, c.lo * (1 - 1e-4)) > phi
    else:
        assert c.extra["open_at_zero"]
        assert okp_df(gamma, 1e-9) <= phi


def test_lambert_principal_branch_when_t_above_one():
    # gamma=1000, phi=100: t = ln(1000)*100/900 > 0.76; pick phi so t > 1
    gamma, phi = 1000.0, 130.0
    t = math.log(gamma) * phi / (gamma - phi)
    assert t > 1
    c = okp_phi_class(gamma, phi)
    if c.lo > 0:
        lam, branch = lambert_alpha_low(gamma, phi)
        assert branch == 0 and lam == pytest.approx(c.lo, abs=1e-6)


def test_phi_class_errors():
    with pytest.raises(InvalidInputError):
        okp_phi_class(20, 20)
    with pytest.raises(InvalidInputError):
        okp_phi_class(20, 0.5)


def test_worst_case_shape():
    b = DensityBounds(1.0, math.e)
    inst = okp_worst_case(b, 1.0, 1e-3)
    w = sum(i.weight for i in inst.items if i.density < b.U - 1e-4)
    assert w == pytest.approx(1.0, abs=1e-9)
    inst2 = okp_worst_case(DensityBounds.from_gamma(20), 2.0, 1e-3)
    zu = ThresholdCurve.from_gamma(20, 2.0).saturation_point()
    assert psi(ThresholdCurve.from_gamma(20, 2.0), zu * (1 - 1e-12)) == pytest.approx(20, rel=1e-9)
    batch1 = [i for i in inst2.items if i.density < 20 - 1e-3]
    assert sum(i.weight for i in batch1) == pytest.approx(zu, abs=1e-9)


def test_worst_case_precondition():
    with pytest.raises(InvalidInputError):
        okp_worst_case(DensityBounds.from_gamma(20), 1.0, 0.1)


def test_worst_case_alpha_one_ratio(b20):
    r = okp_run(ThresholdCurve(b20, 1.0), okp_worst_case(b20, 1.0, 1e-4))
    assert r.ratio == pytest.approx(math.log(20) + 1, rel=0.01)


def test_tables():
    assert len(threshold_table(20, [0.5, 1], 11)) == 11
    assert df_table([20], [1.0])[0] == (1.0, 1.0)
    assert df_gamma_table([1.0], [5.0])[0] == (5.0, 1.0)


@pytest.mark.parametrize("gamma,alpha", [(5.0, 1.5), (5.0, 4.0), (2.0, 2.0)])
def test_worst_case_second_batch_rejected_for_small_gamma(gamma, alpha):
    b = DensityBounds.from_gamma(gamma)
    r = okp_run(ThresholdCurve(b, alpha), okp_worst_case(b, alpha, 1e-4))
    assert r.ratio == pytest.approx(okp_cr(gamma, alpha), rel=0.02)
