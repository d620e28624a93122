from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given

from algebroid_index.weyl import GlPair, MatrixWeyl, ShapeError, embed_gl, moyal, p, project_gl, q, star_commutator
from oracles import moyal as moyal_oracle
from oracles import same
from strategies import polys

W1 = ["q1", "p1"]
W2 = ["q1", "p1", "q2", "p2"]


@given(polys(W1, 3), polys(W1, 3))
def test_moyal_matches_bidifferential_series_n1(f, g):
    assert same(moyal(f, g, "symmetric", 1), moyal_oracle(f, g, 1))
    assert same(moyal(f, g, "literal", 1), moyal_oracle(f, g, 1, sp.Integer(1)))


@given(polys(W2, 2), polys(W2, 2))
def test_moyal_matches_bidifferential_series_n2(f, g):
    assert same(moyal(f, g, "symmetric", 2), moyal_oracle(f, g, 2))


@given(polys(W1, 3), polys(W1, 3), polys(W1, 3))
def test_associative(f, g, h):
    for conv in ("symmetric", "literal"):
        assert moyal(moyal(f, g, conv), h, conv) == moyal(f, moyal(g, h, conv), conv)


def test_generators():
    assert moyal(p(1), q(1)) == p(1) * q(1) + Fraction(1, 2)
    assert moyal(q(1), p(1)) == q(1) * p(1) - Fraction(1, 2)
    assert star_commutator(p(1), q(1)) == 1
    assert star_commutator(p(1), q(2), n=2).is_zero()
    assert star_commutator(q(1) * q(1) * p(1), p(1)) == (q(1) * p(1)).scale(-2)


def test_literal_convention_doubles_the_bracket():
    assert star_commutator(p(1), q(1), "literal") == 2


def test_unit_and_scalars():
    f = q(1) * p(1) + p(1) ** 2
    assert moyal(f, 1 + 0 * f) == f
    assert moyal(f.scale(3), q(1)) == moyal(f, q(1)).scale(3)


@given(polys(W1, 2), polys(W1, 2))
def test_matrix_trace_of_commutator_is_a_commutator_sum(f, g):
    A = MatrixWeyl([[f, g], [g, f * f]])
    B = MatrixWeyl([[g, q(1)], [p(1), f]])
    tr = A.commutator(B).trace()
    direct = sum((star_commutator(A.entries[i][j], B.entries[j][i]) for i in range(2) for j in range(2)), 0 * f)
    assert tr == direct


def test_gl_embedding_roundtrip_and_bracket():
    a = GlPair.make([[1, 2], [0, -1]], [[3]])
    b = GlPair.make([[0, 1], [1, 0]], [[-2]])
    for pair in (a, b):
        assert project_gl(embed_gl(pair), 2) == pair
    lhs = embed_gl(a).commutator(embed_gl(b))
    assert lhs == embed_gl(a.bracket(b))


def test_shape_errors():
    with pytest.raises(ShapeError):
        MatrixWeyl([[q(1)], [p(1), q(1)]])
