"""Independent sympy implementations used as test oracles.

Nothing here calls into the package beyond turning a ``Poly`` into text, so
agreement between these functions and the package is real evidence.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import sympy as sp

from algebroid_index.scalar import Poly


def to_sympy(f) -> sp.Expr:
    return sp.expand(sp.sympify(str(f).replace("^", "**")))


def same(f, expr) -> bool:
    return sp.expand(to_sympy(f) - sp.sympify(expr)) == 0


def moyal(f, g, n: int, c=sp.Rational(1, 2)) -> sp.Expr:
    """``μ exp(c Σ_i (∂_{p_i} ⊗ ∂_{q_i} − ∂_{q_i} ⊗ ∂_{p_i}))(f ⊗ g)`` by explicit series."""
    f, g = to_sympy(f), to_sympy(g)
    qs = [sp.Symbol(f"q{i}") for i in range(1, n + 1)]
    ps = [sp.Symbol(f"p{i}") for i in range(1, n + 1)]
    # doubled variables: slot 1 keeps the names, slot 2 gets primes
    q2 = [sp.Symbol(f"q{i}_") for i in range(1, n + 1)]
    p2 = [sp.Symbol(f"p{i}_") for i in range(1, n + 1)]
    G = g.subs(dict(zip(qs + ps, q2 + p2)), simultaneous=True)
    term = f * G
    total = sp.Integer(0)
    k = 0
    while term != 0:
        total += term / sp.factorial(k)
        term = sp.expand(c * sum(sp.diff(term, p, q_) - sp.diff(term, q, p_) for q, p, q_, p_ in zip(qs, ps, q2, p2)))
        k += 1
    return sp.expand(total.subs(dict(zip(q2 + p2, qs + ps)), simultaneous=True))


def tau2(a0, a1, a2) -> Fraction:
    """τ₂ on W₁ straight from the defining integral.

    Slot s carries variables (q_s, p_s); the operator
    ``Π_{i<j} exp((t_j − t_i − ½)(∂_{q_i}∂_{p_j} − ∂_{p_i}∂_{q_j}))`` with ``t_0 = 0`` acts on
    ``a_0 ⊗ (∂_p a_1 ⊗ ∂_q a_2 − ∂_q a_1 ⊗ ∂_p a_2)``, then all fiber variables are set
    to zero and ``0 ≤ t_1 ≤ t_2 ≤ 1`` is integrated out.
    """
    q = sp.symbols("Q0:3")
    p = sp.symbols("P0:3")
    t = [sp.Integer(0), sp.Symbol("t1"), sp.Symbol("t2")]
    slot = [to_sympy(a).subs({sp.Symbol("q1"): q[s], sp.Symbol("p1"): p[s]}, simultaneous=True) for s, a in enumerate((a0, a1, a2))]
    F = slot[0] * (sp.diff(slot[1], p[1]) * sp.diff(slot[2], q[2]) - sp.diff(slot[1], q[1]) * sp.diff(slot[2], p[2]))
    F = sp.expand(F)
    total, term, k = sp.Integer(0), F, 0
    while term != 0:
        total += term / sp.factorial(k)
        term = sp.expand(
            sum((t[j] - t[i] - sp.Rational(1, 2)) * (sp.diff(term, q[i], p[j]) - sp.diff(term, p[i], q[j])) for i, j in itertools.combinations(range(3), 2))
        )
        k += 1
    val = sp.expand(total).subs({v: 0 for v in q + p})
    t1, t2 = t[1], t[2]
    out = sp.integrate(sp.integrate(val, (t1, 0, t2)), (t2, 0, 1))
    return Fraction(int(sp.numer(out)), int(sp.denom(out)))


def series(expr, x, order: int) -> list:
    s = sp.series(expr, x, 0, order + 1).removeO()
    return [Fraction(int(sp.numer(c)), int(sp.denom(c))) for c in (s.coeff(x, k) for k in range(order + 1))]


def frac(expr) -> Fraction:
    expr = sp.nsimplify(expr)
    return Fraction(int(sp.numer(expr)), int(sp.denom(expr)))


def poly_from(expr) -> Poly:
    from algebroid_index.scalar import parse_poly

    return parse_poly(str(sp.expand(expr)).replace("**", "^"))
