import pytest
import sympy as sp
from hypothesis import given

from algebroid_index.algebroid import (
    Connection,
    LForm,
    Presentation,
    PresentationError,
    ce_diff,
    connection_from_splitting,
    curvature,
    is_flat,
    is_torsion_free,
    parse_presentation,
    serialize_presentation,
    torsion,
    validate,
)
from algebroid_index.io import bundled_names, data_file, load_presentation, roundtrip_presentation
from algebroid_index.scalar import Poly
from oracles import same, to_sympy
from strategies import polys

x, y = Poly.var("x"), Poly.var("y")
PLANE = Presentation.make(["x", "y"], 2, [[1, 0], [0, 1]])


def test_bundled_presentations_roundtrip_bit_exact():
    names = bundled_names(".pres")
    assert "derx.pres" in names and "sl2.pres" in names
    for name in names:
        text = data_file(name).read_text()
        assert roundtrip_presentation(text), name
        canon = serialize_presentation(parse_presentation(text))
        assert serialize_presentation(parse_presentation(canon)) == canon


def test_validator_accepts_algebroids_and_names_failures():
    for name in ("derx", "derxy", "derxy_curved", "derxyz_curved", "sl2"):
        assert validate(load_presentation(name).pres).valid
    bad = validate(load_presentation("broken_anchor").pres)
    assert not bad.valid and bad.failures[0][0] == "anchor"
    bad = validate(load_presentation("broken_jacobi").pres)
    assert not bad.valid and bad.failures[0][0] == "jacobi"


def test_sl2_structure_constants():
    sl = load_presentation("sl2").pres
    assert sl.m == 0
    assert (sl.c(0, 1, 2), sl.c(2, 0, 0), sl.c(2, 1, 1)) == (1, 2, -2)


def test_anchor_shape_is_checked():
    with pytest.raises(PresentationError):
        Presentation.make(["x"], 2, [[1]])


@given(polys(["x", "y"], 3), polys(["x", "y"], 3))
def test_ce_differential_is_de_rham_on_the_plane(f, g):
    fx, fy = (sp.diff(to_sympy(f), v) for v in sp.symbols("x y"))
    df = ce_diff(LForm.function(f), PLANE)
    assert same(df.coeffs.get((0,), (Poly(),))[0], fx)
    assert same(df.coeffs.get((1,), (Poly(),))[0], fy)
    one = LForm.make(1, {(0,): f, (1,): g})
    d1 = ce_diff(one, PLANE)
    expected = sp.diff(to_sympy(g), sp.Symbol("x")) - sp.diff(to_sympy(f), sp.Symbol("y"))
    assert same(d1.coeffs.get((0, 1), (Poly(),))[0], expected)


@given(polys(["x", "y"], 3))
def test_ce_differential_squares_to_zero_on_sl2_and_plane(f):
    sl = load_presentation("sl2").pres
    one = LForm.make(1, {(0,): f, (2,): f * f})
    assert ce_diff(ce_diff(one, sl), sl).is_zero()
    assert ce_diff(ce_diff(LForm.function(f), PLANE), PLANE).is_zero()


def test_curvature_and_torsion_by_hand():
    curved = load_presentation("derxy_curved")
    # ∇_1 e_1 = y e_1, so R(e_1, e_2) e_1 = −∇_2(y e_1) = −e_1
    R = curvature(curved.conn, curved.pres)
    assert R[(0, 1)][0][0] == -1 and R[(0, 1)][1][1] == 0
    assert is_torsion_free(curved.conn, curved.pres) and not is_flat(curved.conn, curved.pres)
    tors = load_presentation("derxy_torsion")
    assert torsion(tors.conn, tors.pres)[(0, 1)] == (y, Poly())
    assert is_flat(Connection.zero(2, 2), PLANE)


def test_connection_from_splitting():
    conn = connection_from_splitting(PLANE)
    assert is_flat(conn, PLANE)
    assert all(conn.G(i, j, k).is_zero() for i in range(2) for j in range(2) for k in range(2))


def test_wedge_is_graded_commutative():
    a = LForm.make(1, {(0,): x})
    b = LForm.make(1, {(1,): y})
    assert (a.wedge(b) + b.wedge(a)).is_zero()
    assert a.wedge(a).is_zero()
