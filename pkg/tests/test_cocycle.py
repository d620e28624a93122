from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebroid_index.algebras import WeylAlgebra
from algebroid_index.cocycle import ArityError, closedness_residue, tau_c2n, tau_cyclic, tau_hoch, tau_matrix, tau_on_chain
from algebroid_index.homalg import Chain, b_diff, lie_act
from algebroid_index.scalar import parse_poly
from algebroid_index.weyl import MatrixWeyl
from oracles import tau2 as tau2_oracle

P = parse_poly
W1_MONOS = [P(s) for s in ("1", "q1", "p1", "q1^2", "q1*p1", "p1^2", "q1^2*p1", "q1*p1^2", "p1^3", "q1^3")]


def tau2(a0, a1, a2):
    return tau_hoch(1, [a0, a1, a2]).const_term()


def test_normalization():
    assert tau_c2n(1) == 1
    assert tau_c2n(2) == 1


def test_constants_are_killed():
    assert tau2(P("1"), P("1"), P("1")) == 0
    assert tau2(P("q1"), P("1"), P("p1")) == 0


def test_basicness_witness_against_oracle():
    # the slotwise form of basicness fails on this tuple; the value is checked independently
    assert tau2(P("1"), P("q1*p1"), P("q1*p1")) == Fraction(-1, 6)
    assert tau2_oracle(P("1"), P("q1*p1"), P("q1*p1")) == Fraction(-1, 6)


@settings(max_examples=25)
@given(st.sampled_from(W1_MONOS), st.sampled_from(W1_MONOS), st.sampled_from(W1_MONOS), st.integers(-3, 3))
def test_tau2_matches_integral_oracle(a0, a1, a2, c):
    a1 = a1 + W1_MONOS[1].scale(c)
    assert tau2(a0, a1, a2) == tau2_oracle(a0, a1, a2)


def test_arity():
    with pytest.raises(ArityError):
        tau_hoch(1, [P("1"), P("q1")])


def test_cyclic_extension_lower_component():
    # τ₀(1) for n = 1 comes from the ι_π contraction of τ₂
    val = tau_cyclic(1, [P("1")])
    assert val[-1] == 1
    top = tau_cyclic(1, [P("1"), P("p1"), P("q1")])
    assert top[0] == tau2(P("1"), P("p1"), P("q1"))


def test_hochschild_cocycle_on_chains():
    W = WeylAlgebra(1)
    for ents in ([P("q1"), P("p1"), P("q1*p1"), P("p1")], [P("1"), P("q1^2"), P("p1"), P("p1")]):
        assert not tau_on_chain(1, b_diff(Chain.from_tensor(W, ents)))


def test_cyclic_closedness_on_a_one_chain():
    W = WeylAlgebra(1)
    c = Chain.from_tensor(W, [P("q1"), P("p1")])
    assert not closedness_residue(1, 0, c)


def test_gl1_invariance():
    W = WeylAlgebra(1)
    X = P("q1*p1")
    for ents in ([P("q1"), P("p1"), P("q1*p1")], [P("p1^2"), P("q1"), P("q1")]):
        assert not tau_on_chain(1, lie_act(X, Chain.from_tensor(W, ents)))


def test_matrix_extension():
    args = [P("1"), P("p1"), P("q1")]
    scalar = tau_cyclic(1, args)
    assert tau_matrix(1, 1, [MatrixWeyl.scalar(a) for a in args]) == scalar
    r = 3
    lhs = tau_matrix(1, r, [MatrixWeyl.scalar(a, r) for a in args]) - tau_matrix(1, r, [MatrixWeyl.scalar(a, r) for a in (args[0], args[2], args[1])])
    assert lhs[0] == r


def test_matrix_rank_mismatch():
    with pytest.raises(ValueError):
        tau_matrix(1, 2, [MatrixWeyl.scalar(P("1"), 2), MatrixWeyl.scalar(P("p1"), 3), MatrixWeyl.scalar(P("q1"), 2)])
