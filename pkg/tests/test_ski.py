import pytest
from hypothesis import given, strategies as st

from compols.core import InvalidInputError
from compols.ski import (SkiProblem, ski_cost, ski_cr, ski_curve, ski_df, ski_phi_class,
                         worst_ratio_bruteforce)


@pytest.mark.parametrize("p,b,x,expected", [
    (10, 10, 5, (5, 5)),
    (10, 10, 100, (20, 10)),
    (10, 5, 6, (15, 6)),
])
def test_ski_cost(p, b, x, expected):
    assert ski_cost(SkiProblem(p, b), x) == expected


def test_ski_cost_rejects_zero_days():
    with pytest.raises(InvalidInputError):
        ski_cost(SkiProblem(10, 5), 0)


def test_ski_problem_validation():
    with pytest.raises(InvalidInputError):
        SkiProblem(1, 1)
    with pytest.raises(InvalidInputError):
        SkiProblem(10, 0)


def test_ski_df_examples():
    assert ski_df(7, 7) == 1.0
    assert ski_df(12, 36) == 2.0
    assert ski_df(10, 5) == 1.5
    assert ski_cr(10, 10) == 2.0


def test_df_formula_bounds_integer_slack():
    # the formula is an upper bound for b < p: brute force gives (b+p)/(b+1) = 2.5 here
    assert worst_ratio_bruteforce(10, 5) == 2.5
    assert worst_ratio_bruteforce(10, 5) / 2 <= ski_df(10, 5)


def test_slack_shrinks_with_p():
    gaps = [ski_df(p, p // 2) - worst_ratio_bruteforce(p, p // 2) / 2 for p in (10, 100, 1000)]
    assert gaps[0] > gaps[1] > gaps[2] > 0


@given(st.integers(2, 50), st.integers(1, 150))
def test_bruteforce_vs_formula(p, b):
    w = worst_ratio_bruteforce(p, b)
    assert w <= 2 * ski_df(p, b) + 1e-12
    if b >= p:
        assert abs(w - 2 * ski_df(p, b)) <= 1e-12


@pytest.mark.parametrize("p,phi,lo,hi", [(10, 1, 10, 10), (12, 2, 4, 36), (10, 1.5, 5, 20)])
def test_phi_class_examples(p, phi, lo, hi):
    c = ski_phi_class(p, phi)
    assert (c.lo, c.hi) == (lo, hi)
    assert c.df_lo <= phi and c.df_hi <= phi


@given(st.integers(2, 60), st.floats(1.0, 6.0))
def test_phi_class_membership(p, phi):
    c = ski_phi_class(p, phi)
    for b in range(int(c.lo), int(c.hi) + 1):
        assert ski_df(p, b) <= phi
    if c.lo > 1:
        assert ski_df(p, int(c.lo) - 1) > phi
    assert ski_df(p, int(c.hi) + 1) > phi
    assert p in c


@given(st.integers(2, 80))
def test_minimizer_is_p(p):
    dfs = [ski_df(p, b) for b in range(1, 4 * p)]
    assert dfs.index(min(dfs)) + 1 == p


def test_phi_below_one_rejected():
    with pytest.raises(InvalidInputError):
        ski_phi_class(10, 0.9)


def test_curve():
    rows = ski_curve(10, 2)
    assert len(rows) == 20
    assert rows[9] == (1.0, 1.0)
