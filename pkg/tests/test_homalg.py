import pytest
from hypothesis import given

from algebroid_index.algebras import PolyAlgebra, WeylAlgebra
from algebroid_index.homalg import AlgebraMismatch, B_diff, Chain, UModuleKind, b_diff, bB_diff, cycle_c2n, insert, lie_act, shuffle
from algebroid_index.scalar import Poly
from strategies import chains, polys

W1 = WeylAlgebra(1)
XY = PolyAlgebra(["x", "y"])
x, y = Poly.var("x"), Poly.var("y")
q, p = Poly.var("q1"), Poly.var("p1")


def T(alg, *entries, coeff=1, u=0):
    return Chain.from_tensor(alg, list(entries), coeff, u)


def test_b_on_small_tensors():
    assert b_diff(T(W1, p, q)) == T(W1, Poly.const(1))
    assert b_diff(T(XY, x, y)).is_zero()
    # b(a⊗b⊗c) = ab⊗c − a⊗bc + ca⊗b
    expected = T(XY, x * y, x) - T(XY, x, y * x) + T(XY, x * x, y)
    assert b_diff(T(XY, x, y, x)) == expected


def test_B_on_small_tensors():
    assert B_diff(T(XY, x)) == T(XY, Poly.const(1), x)
    assert B_diff(T(XY, x, y)) == T(XY, Poly.const(1), x, y) - T(XY, Poly.const(1), y, x)


def test_normalized_complex_drops_units():
    assert T(XY, x, Poly.const(1)).is_zero()
    assert B_diff(B_diff(T(XY, x))).is_zero()


@given(chains(W1, ["q1", "p1"], 4, 2))
def test_differentials_over_weyl(c):
    assert b_diff(b_diff(c)).is_zero()
    assert B_diff(B_diff(c)).is_zero()
    assert (b_diff(B_diff(c)) + B_diff(b_diff(c))).is_zero()


@given(chains(XY, ["x", "y"], 4, 2))
def test_differentials_over_polynomials(c):
    assert b_diff(b_diff(c)).is_zero()
    assert (b_diff(B_diff(c)) + B_diff(b_diff(c))).is_zero()
    d = bB_diff(c, "periodic")
    assert bB_diff(d, "periodic").is_zero()


@given(chains(W1, ["q1", "p1"], 3, 2), polys(["q1", "p1"], 2))
def test_cartan_relation(c, a):
    assert lie_act(a, c) == b_diff(insert(a, c)) + insert(a, b_diff(c))


@given(chains(XY, ["x", "y"], 2, 2), chains(XY, ["x", "y"], 2, 2))
def test_b_is_a_derivation_of_the_shuffle_product(c1, c2):
    # on a commutative algebra, for homogeneous c1 of degree k: b(c1×c2) = b c1 × c2 + (−1)^k c1 × b c2
    for k in c1.degrees():
        part = Chain(XY, {key: v for key, v in c1.terms.items() if len(key) - 2 == k})
        lhs = b_diff(shuffle(part, c2))
        rhs = shuffle(b_diff(part), c2) + shuffle(part, b_diff(c2)).scale((-1) ** k)
        assert lhs == rhs


def test_shuffle_of_one_slot_chains():
    s = shuffle(T(XY, Poly.const(1), x), T(XY, Poly.const(1), y))
    assert s == T(XY, Poly.const(1), x, y) - T(XY, Poly.const(1), y, x)


def test_u_module_kinds():
    c = T(XY, x, u=-1) + T(XY, y, u=0) + T(XY, x * y, u=2)
    assert c.truncate("hochschild") == T(XY, y)
    assert c.truncate("cyclic") == T(XY, x, u=-1) + T(XY, y)
    assert c.truncate("negative") == T(XY, y) + T(XY, x * y, u=2)
    assert c.truncate(UModuleKind.PERIODIC) == c
    with pytest.raises(ValueError):
        c.truncate("bogus")


def test_fundamental_cycle_is_closed():
    for n in (1, 2):
        c = cycle_c2n(WeylAlgebra(n), n)
        assert b_diff(c).is_zero()
        assert not c.is_zero()


def test_mixing_algebras_is_an_error():
    with pytest.raises(AlgebraMismatch):
        T(XY, x) + T(W1, q)
