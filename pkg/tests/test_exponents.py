from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from boglab.errors import AlphaOutOfRange, DeltaOutOfRange
from boglab.exponents import (
    CSV_HEADER,
    ExponentParams,
    beta,
    beta_ps,
    branch_condition,
    branch_equivalence,
    branch_value,
    frac,
    frange,
    parse_range,
    positivity_check,
    positivity_value,
    q_of_delta,
    scaling_exponent,
    scaling_exponent_check,
    slab_r_range,
    summarize,
    table_csv,
    table_rows,
)

deltas = st.fractions(0, 1, max_denominator=200)
alphas = st.fractions(0, 5, max_denominator=200)


def test_q_values():
    assert q_of_delta(0) == 3
    assert q_of_delta(1) == F(12, 5)
    assert q_of_delta(F(1, 2)) == F(30, 11)


def test_ranges():
    with pytest.raises(DeltaOutOfRange):
        q_of_delta(F(-1, 100))
    with pytest.raises(DeltaOutOfRange):
        beta(F(101, 100), 0)
    with pytest.raises(AlphaOutOfRange):
        beta(0, F(-1, 3))
    with pytest.raises(AlphaOutOfRange):
        ExponentParams(F(1, 2), F(-1))


@given(deltas)
def test_beta_at_alpha_zero(d):
    assert beta(d, 0).beta == -1 / (3 - d)
    assert beta_ps(d, 0).beta == -1 / (3 - d)


def test_beta_origin_and_branch_boundary():
    assert beta(0, 0).beta == F(-1, 3)
    v = beta(1, F(3, 19))
    assert branch_value(1, F(3, 19)) == 0
    assert v.beta2 == v.beta3


def test_branch_examples():
    assert branch_condition(0, F(1, 4))
    assert branch_value(0, F(1, 4)) == 0
    assert not branch_condition(0, 1)


@given(deltas, st.fractions(0, F(3, 19), max_denominator=200))
def test_branch_true_below_three_nineteenths(d, a):
    assert branch_condition(d, a)


@given(deltas, alphas)
def test_branch_equivalence(d, a):
    assert branch_equivalence(d, a)


def test_positivity_examples():
    assert positivity_value(0, 0) == F(2, 3)
    assert positivity_value(1, 0) == F(3, 4)
    assert positivity_check(0, 0) and positivity_check(1, 0)
    with pytest.raises(ValueError):
        positivity_value(0, 0, "cube")


def test_positivity_dense_grid():
    for d in frange(0, 1, F(1, 50)):
        for a in frange(0, 3, F(1, 50)):
            assert positivity_check(d, a)


def test_r_range():
    assert slab_r_range(0) == (F(3, 2), 2)
    assert slab_r_range(1) == (F(6, 5), F(6, 5))


def test_scaling_exponent():
    assert scaling_exponent(3, 3) == -1
    assert scaling_exponent(2) == F(1, 2)
    rep = scaling_exponent_check()
    assert rep.identity_holds and rep.bookkeeping_holds
    assert rep.exponent_q_eq_m == -1 and rep.exponent_2_inf == F(1, 2)


@given(st.fractions(F(11, 10), 10, max_denominator=50), st.fractions(F(11, 10), 10, max_denominator=50))
def test_scaling_identity(q, m):
    assert scaling_exponent(q, m) + 3 / m - 3 / q + 1 == 0


@given(deltas)
def test_q_identity(d):
    assert q_of_delta(d) * (1 - d / 6) == 3 - d


@given(deltas, st.fractions(0, 2, max_denominator=100))
def test_lipschitz_continuity(d, a):
    # sup of |d beta / d delta| on [0,1]x[0,2] is 109/24, attained at (1, 2)
    step = F(1, 100)
    for fn in (beta, beta_ps):
        base = fn(d, a).beta
        if d + step <= 1:
            assert abs(fn(d + step, a).beta - base) <= 5 * step
        assert abs(fn(d, a + step).beta - base) <= 4 * step


def test_delta_slope_exceeds_four_near_corner():
    h = F(1, 10**6)
    slope = (beta(1, 2).beta - beta(1 - h, 2).beta) / h
    assert abs(slope - F(109, 24)) < F(1, 1000)
    assert F(109, 24) > 4


def test_all_values_exact():
    v = beta(F(1, 3), F(7, 10))
    assert all(isinstance(x, F) for x in (v.q, v.beta, *v.beta_terms, v.r1, v.r2))


def test_periodic_drop_claims_on_grid():
    # first periodic term is dominated by the third for alpha <= 2, by the second for alpha >= 1/5
    for d in frange(0, 1, F(1, 100)):
        for a in frange(0, 2, F(1, 100)):
            v = beta_ps(d, a)
            if a >= F(1, 5):
                assert v.beta1 <= v.beta2
            assert v.beta1 <= v.beta3
            assert v.dropped_term_dominated


def test_whole_drop_on_grid():
    for d in frange(0, 1, F(1, 100)):
        for a in frange(0, 2, F(1, 100)):
            assert beta(d, a).dropped_term_dominated


def test_frac_and_parse():
    assert frac(0.01) == F(1, 100)
    assert frac("3/19") == F(3, 19)
    assert parse_range("0:1:0.25") == [0, F(1, 4), F(1, 2), F(3, 4), 1]
    assert parse_range("1/2, 1") == [F(1, 2), 1]
    assert frange(0, 1, F(1, 3)) == [0, F(1, 3), F(2, 3), 1]
    with pytest.raises(ValueError):
        parse_range("0:1")
    with pytest.raises(ValueError):
        frange(0, 1, 0)


def test_table_and_summary():
    rows = table_rows(parse_range("0:1:1/100"), parse_range("0:2:1/100"))
    s = summarize(rows)
    assert s.points == 101 * 201
    assert s.drop_ok and s.branch_ok and s.positive_ok
    text = table_csv(rows[:2])
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert text.splitlines()[1] == "0,0,3,-1/2,-1/2,-1/3,-1/3,true"
    ps = summarize(table_rows([0, 1], [0, 1], "periodic"), "periodic")
    assert ps.positive_ok
