import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algebroid_index.envelope import Envelope, JetTable, TruncationError, coproduct, format_multi_index, jet_product, multi_indices, normal_order, parse_multi_index
from algebroid_index.io import load_presentation
from algebroid_index.scalar import Poly

x, y = Poly.var("x"), Poly.var("y")


def env_of(name):
    return Envelope(load_presentation(name).pres)


def test_relations_in_der_kx():
    env = env_of("derx")
    e, X = env.gen(0), env.scalar(x)
    assert e * X - X * e == env.one()
    assert e * X * X - X * X * e == env.scalar(x * 2)


def test_relations_in_sl2():
    env = env_of("sl2")
    e1, e2, e3 = (env.gen(i) for i in range(3))
    assert e1 * e2 - e2 * e1 == e3
    assert e3 * e1 - e1 * e3 == e1.scale(2)
    assert e3 * e2 - e2 * e3 == e2.scale(-2)


def test_associativity_on_words():
    env = env_of("derxy_curved2")
    gens = [env.gen(0), env.gen(1), env.scalar(x), env.scalar(y * y)]
    rng = random.Random(5)
    for _ in range(20):
        a, b, c = (rng.choice(gens) * rng.choice(gens) for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_normal_order_and_filtration():
    env = env_of("derxy")
    w = normal_order([1, 0, 1], env)
    assert w == env.gen(1) * env.gen(0) * env.gen(1)
    assert w.filtration == 3
    assert env.scalar(x).filtration == 0


def test_coproduct_is_binomial():
    env = env_of("derx")
    e = env.gen(0)
    delta = coproduct(e * e * e)
    assert {k: v.const_term() for k, v in delta.items()} == {((a,), (3 - a,)): math.comb(3, a) for a in range(4)}


@given(st.integers(1, 4), st.integers(0, 5))
def test_multi_indices_count_and_format(r, d):
    idx = multi_indices(r, d)
    assert len(idx) == math.comb(r + d - 1, d)
    for a in idx:
        assert parse_multi_index(format_multi_index(a), r) == a


def test_parse_multi_index_rejects_out_of_order():
    with pytest.raises(ValueError):
        parse_multi_index("e2*e1", 2)


def _jet(env, seed, order=3):
    rng = random.Random(seed)
    return JetTable.from_function(env, order, lambda a: Poly.const(rng.randint(-3, 3)) + x * rng.randint(-2, 2))


def test_jet_product_is_commutative_with_unit():
    env = env_of("derxy_curved")
    f, g = _jet(env, 1), _jet(env, 2)
    assert jet_product(f, g) == jet_product(g, f)
    assert jet_product(f, JetTable.counit(env, 3)) == f


def test_jet_text_roundtrip():
    env = env_of("derxy_curved")
    f = _jet(env, 3)
    assert JetTable.from_text(env, f.to_text()) == f


def test_jet_evaluation_beyond_order_is_refused():
    env = env_of("derx")
    f = _jet(env, 4, order=1)
    with pytest.raises(TruncationError):
        f(env.gen(0) * env.gen(0))
