from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from algebroid_index.algebroid import Connection, ce_diff
from algebroid_index.chernweil import InvariantSeries, TdCh, TruncationError, algebroid_cw, ch_scalar_series, td_scalar_series, transgression
from algebroid_index.io import load_presentation
from algebroid_index.scalar import Poly
from oracles import series

X = sp.Symbol("X")


def test_scalar_series_match_sympy():
    assert td_scalar_series(5, "calibrated") == series(X / (1 - sp.exp(-X)), X, 5)
    assert td_scalar_series(5, "literal") == series(X / (1 - sp.exp(X)), X, 5)
    assert ch_scalar_series(5) == series(sp.exp(X), X, 5)


def test_gl1_examples():
    assert td_scalar_series(2, "literal") == [-1, Fraction(1, 2), Fraction(-1, 12)]
    assert td_scalar_series(2, "calibrated") == [1, Fraction(1, 2), Fraction(1, 12)]
    assert ch_scalar_series(2) == [1, 1, Fraction(1, 2)]


TD_COEFFS = series(X / (1 - sp.exp(-X)), X, 3)
EXP_COEFFS = series(sp.exp(X), X, 3)


def _truncated_product(factors, order):
    out = [Fraction(1)] + [Fraction(0)] * order
    for f in factors:
        out = [sum(out[i] * f[k - i] for i in range(k + 1)) for k in range(order + 1)]
    return out


@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3), st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_matrix_series_on_triangular_arguments(diag, upper):
    # det f(A) = Π f(a_ii) and tr e^A = Σ e^{a_ii} for triangular A
    A = [[diag[0], upper[0], upper[1]], [0, diag[1], upper[2]], [0, 0, diag[2]]]
    want_td = _truncated_product([[c * d**k for k, c in enumerate(TD_COEFFS)] for d in diag], 3)
    want_ch = [sum(EXP_COEFFS[k] * d**k for d in diag) for k in range(4)]
    for k in range(4):
        assert InvariantSeries("td", 3, 3, "calibrated").component(k, A).const_term() == want_td[k]
        assert InvariantSeries("ch", 3, 3).component(k, A).const_term() == want_ch[k]


def test_truncation_is_reported():
    with pytest.raises(TruncationError):
        InvariantSeries("ch", 1, 2).component(3, [[1]])


def test_flat_connection_gives_constants_only():
    pf = load_presentation("derxy")
    P = TdCh(2, 1, 2)
    assert algebroid_cw(pf.pres, Connection.zero(2, 2), None, P, 1).is_zero()
    assert algebroid_cw(pf.pres, Connection.zero(2, 2), None, P, 0).coeffs[()] == (Poly.const(1),)


def test_closed_on_rank_three_and_sl2():
    pf = load_presentation("derxyz_curved")
    form = algebroid_cw(pf.pres, pf.conn, pf.econn, TdCh(3, 2, 2), 1)
    assert not form.is_zero()
    assert ce_diff(form, pf.pres).is_zero()
    sl = load_presentation("sl2")
    E = Connection.from_symbols(sl.pres, {(0, 0, 1): 1, (1, 1, 0): 1, (2, 0, 0): 1}, 2)
    form = algebroid_cw(sl.pres, sl.conn, E, TdCh(3, 2, 2), 1)
    assert not form.is_zero() and ce_diff(form, sl.pres).is_zero()


def test_trace_of_curvature_on_the_plane():
    pf = load_presentation("derxy_curved")
    c1 = algebroid_cw(pf.pres, pf.conn, None, TdCh(2, 1, 1), 1)
    # Td_1 = c_1/2 with c_1 = tr R = −e¹∧e²
    assert c1.coeffs == {(0, 1): (Poly.const(Fraction(-1, 2)),)}


def test_transgression():
    pf = load_presentation("derxy")
    x, y = Poly.var("x"), Poly.var("y")
    L0 = Connection.from_symbols(pf.pres, {(0, 0, 0): y})
    L1 = Connection.from_symbols(pf.pres, {(0, 1, 1): x * y, (1, 0, 1): x, (1, 1, 0): y * y})
    E0 = Connection.from_symbols(pf.pres, {}, 2)
    E1 = Connection.from_symbols(pf.pres, {(0, 0, 1): y, (1, 1, 0): x * x}, 2)
    P = TdCh(2, 2, 2)
    T = transgression(pf.pres, (L0, E0), (L1, E1), P, 1)
    diff = algebroid_cw(pf.pres, L1, E1, P, 1) - algebroid_cw(pf.pres, L0, E0, P, 1)
    assert not diff.is_zero()
    assert (ce_diff(T, pf.pres) - diff).is_zero()
