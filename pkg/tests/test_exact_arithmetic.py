from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from app.utils.fourier_motzkin import FourierMotzkin, feasible
from app.utils.linear_program import LinearProgram, LPStatus, Sense, check_farkas, check_upper_bound, satisfies
from app.utils.qphi import QPhi, format_qphi, parse_qphi
from app.utils.rationals import INF, ext, ext_le, ext_sum, fmt, parse_ext

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
qphis = st.builds(QPhi, fractions, fractions)


def test_phi_satisfies_its_minimal_polynomial():
    phi = QPhi.phi()
    assert phi * phi == phi + 1
    assert phi * phi.inverse() == QPhi(1)
    assert phi.inverse() == phi - 1


@given(qphis, qphis)
def test_qphi_field_laws(a, b):
    assert a + b == b + a
    assert a * b == b * a
    if a != QPhi(0):
        assert a * a.inverse() == QPhi(1)


@given(qphis)
def test_qphi_order_matches_bracket(a):
    lo, hi = a.bracket(20)
    assert lo <= hi
    if a.sign() > 0:
        assert hi > 0
    elif a.sign() < 0:
        assert lo < 0
    else:
        assert a == QPhi(0)


@given(qphis)
def test_qphi_text_form(a):
    assert parse_qphi(format_qphi(a)) == a


def test_qphi_comparisons_are_exact():
    # φ^-1 = 0.618..., strictly between 3/5 and 5/8
    inverse = QPhi.phi() ** -1
    assert QPhi(Fraction(3, 5)) < inverse < QPhi(Fraction(5, 8))
    assert format_qphi(inverse) == "-1+1*phi"


def test_extended_rationals():
    assert ext("INF") is INF
    assert ext_le(Fraction(5), INF)
    assert not ext_le(INF, Fraction(5))
    assert ext_sum([Fraction(1, 2), INF]) is INF
    assert fmt(Fraction(6, 4)) == "3/2"
    assert parse_ext("∞") is INF


def test_lp_optimum_with_dual_certificate():
    lp = LinearProgram(2, ["a", "b"])
    lp.add_row([2, 0], Sense.LE, 1)
    lp.add_row([0, 1], Sense.EQ, 1)
    lp.set_objective([1, 0])
    result = lp.solve()
    assert result.status == LPStatus.OPTIMAL
    assert result.optimum == Fraction(1, 2)
    assert satisfies(lp.rows, result.point)
    assert check_upper_bound(lp.rows, result.multipliers, lp.objective, result.optimum)


def test_lp_infeasible_with_farkas_certificate():
    # v = 2v and v = 1
    lp = LinearProgram(1, ["v"])
    lp.add_row([-1], Sense.EQ, 0)
    lp.add_row([1], Sense.EQ, 1)
    result = lp.solve()
    assert result.status == LPStatus.INFEASIBLE
    assert check_farkas(lp.rows, result.multipliers, 1)


def test_lp_unbounded():
    lp = LinearProgram(1)
    lp.add_row([1], Sense.GE, 1)
    lp.set_objective([1])
    assert lp.solve().status == LPStatus.UNBOUNDED


def test_lp_rejects_wrong_row_width():
    with pytest.raises(ValueError):
        LinearProgram(2).add_row([1], Sense.LE, 0)


def test_fourier_motzkin_bounds():
    system = FourierMotzkin(["x", "y"])
    system.add({"x": 1, "y": 1}, "==", 1)
    system.add({"x": 1, "y": -2}, "<=", 0)
    system.add_nonnegativity()
    projected = system.project_onto({"x"})
    assert projected.bounds("x") == (Fraction(0), Fraction(2, 3))


def test_fourier_motzkin_detects_infeasibility():
    ok, trace = feasible(["v"], [({"v": 1}, "==", 1), ({"v": -1}, "==", 0)])
    assert not ok


def test_fourier_motzkin_agrees_with_simplex_on_a_feasible_system():
    ok, _ = feasible(["a", "b"], [({"a": 2}, "<=", 1), ({"b": 1}, "==", 1)])
    assert ok
