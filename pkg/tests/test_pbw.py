"""PBW map, Fedosov form and the derivative along a family of connections."""

import itertools
import random
from fractions import Fraction

from algebroid_index.algebroid import Connection
from algebroid_index.envelope import JetTable, jet_product
from algebroid_index.io import load_presentation
from algebroid_index.pbw import (
    PBW,
    FirstOrder,
    exp_derivation,
    fedosov_A,
    mc_terms,
    path_ordered_transport,
    pname,
    qsplit,
    qtrunc,
    symmetrize,
    theta_operator,
)
from algebroid_index.scalar import Poly

x, y, t = Poly.var("x"), Poly.var("y"), Poly.var("t")


def rjet(env, seed, N=4):
    rng = random.Random(seed)
    return JetTable.from_function(env, N, lambda a: Poly.const(rng.randint(-3, 3)) + x * rng.randint(-2, 2) + y * y * rng.randint(0, 1))


def pword(word):
    out = Poly.const(1)
    for b in word:
        out = out * Poly.var(pname(b))
    return out


def curved2():
    pf = load_presentation("derxy_curved2")
    return pf, PBW(pf.pres, pf.conn)


def test_multiplicative_and_invertible():
    pf, pb = curved2()
    f, g = rjet(pb.env, 1), rjet(pb.env, 2)
    assert pb.j(jet_product(f, g), 4) == qtrunc(pb.j(f, 4) * pb.j(g, 4), 2, 4)
    assert pb.j_inverse(pb.j(f, 4), 4) == f


def test_order_two_formula():
    pf, pb = curved2()
    env, conn = pb.env, pf.conn
    f = rjet(env, 3)
    X, Y = env.gen(0), env.gen(1)
    nab = lambda i, j: env.section([conn.G(i, j, k) for k in range(2)])
    lhs = pb.j(f, 4).coefficient({"q1": 1, "q2": 1}, ["q1", "q2"])
    assert lhs == f(X * Y + Y * X - nab(0, 1) - nab(1, 0)).scale(Fraction(1, 2))


def test_flat_line_gives_powers_of_the_generator():
    pf = load_presentation("derx")
    pb = PBW(pf.pres, Connection.zero(1, 1))
    e = pb.env.gen(0)
    power = pb.env.one()
    for k in range(5):
        assert pb.j_star(pword([0] * k)) == power
        power = power * e


def test_adjoint_connection_on_sl2_is_symmetrization():
    sl = load_presentation("sl2")
    pb = PBW(sl.pres, sl.conn)
    for d in range(4):
        for w in itertools.combinations_with_replacement(range(3), d):
            assert pb.j_star(pword(w)) == symmetrize(pb.env, list(w))


def test_low_orders():
    pf, pb = curved2()
    f = rjet(pb.env, 4)
    coeffs = qsplit(pb.j(f, 3), 2)
    assert coeffs[(0, 0)] == f(pb.env.one())
    assert coeffs.get((1, 0), Poly()) == f(pb.env.gen(0))


def test_fedosov_weights():
    for name in ("derx", "derx_curved", "derxy_curved"):
        pf = load_presentation(name)
        conn = pf.conn or Connection.zero(pf.pres.rank, pf.pres.rank)
        A = fedosov_A(PBW(pf.pres, conn), 4)
        for a in range(pf.pres.rank):
            assert A.component(-1, a) == Poly.var(pname(a)).scale(-1)
            assert A.component(0, a).is_zero()


def test_flat_example_is_minus_p():
    pf = load_presentation("derx")
    A = fedosov_A(PBW(pf.pres, Connection.zero(1, 1)), 4)
    assert A.symbol(0) == Poly.var("p1").scale(-1)
    assert A.weights() == [-1]


def test_maurer_cartan_and_detector():
    pf = load_presentation("derxy_curved")
    pb = PBW(pf.pres, pf.conn)
    A = fedosov_A(pb, 5)
    terms = mc_terms(pb, A, 4)
    assert all(t["residue"].is_zero() for t in terms.values())
    assert not all(t["curvature"].is_zero() for t in terms.values())
    bent = A.perturb(1, FirstOrder({"q2": x * Poly.var("q1")}))
    assert not all(t["residue"].is_zero() for t in mc_terms(pb, bent, 4).values())


def test_twisted_maurer_cartan():
    pf = load_presentation("derxy_twisted")
    pb = PBW(pf.pres, pf.conn, pf.econn)
    terms = mc_terms(pb, fedosov_A(pb, 5), 4)
    assert all(t["residue"].is_zero() for t in terms.values())


def _family():
    pres = load_presentation("derxy_torsion").pres
    c0 = load_presentation("derxy_torsion").conn
    c1 = load_presentation("derxy_alt").conn
    return pres, c0, c1, PBW(pres, c0.combine(c1, t))


def test_theta_transport():
    pres, c0, c1, pt = _family()
    p0, p1 = PBW(pres, c0), PBW(pres, c1)
    f = rjet(p0.env, 6)
    assert path_ordered_transport(pt, p0.j(f, 4), 4) == p1.j(f, 4)


def test_theta_depends_on_t_so_the_frozen_exponential_misses():
    pres, c0, c1, pt = _family()
    theta = theta_operator(pt, 5)
    assert any(c.diff("t") for c in theta.vf.values())
    p0, p1 = PBW(pres, c0), PBW(pres, c1)
    f = rjet(p0.env, 7)
    frozen = theta.map(lambda c: c.subs({"t": Poly.const(0)}))
    assert p1.j(f, 4) != exp_derivation(frozen, p0.j(f, 4), 2, 4)


def test_constant_family_has_zero_theta():
    pres, c0, _, _ = _family()
    assert theta_operator(PBW(pres, c0.combine(c0, t)), 4).is_zero()
