"""Weyl algebra W_n and its matrix extension M_r(W_n).

Elements of ``W_n`` are :class:`~algebroid_index.scalar.Poly` objects in the
fiber variables ``q1..qn`` and ``p1..pn``; any other variables (base
coordinates, simplex parameters) are spectators and behave as scalars.  The
star product is

    f ⋆ g = Σ_k c^k / k! · m(π^k (f ⊗ g)),   π = Σ_i (∂_{p_i} ⊗ ∂_{q_i} − ∂_{q_i} ⊗ ∂_{p_i})

with ``c = 1/2`` for the Weyl-symmetric convention (the default) and ``c = 1``
for the ``literal`` one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .scalar import Poly, Q, var_key, var_role

MOYAL_SCALE = {"symmetric": Q(1, 2), "literal": Q(1)}
DEFAULT_MOYAL = "symmetric"

#: How the gl_n summand sits inside W_n: the image of ``A`` is ``Σ A_ij q^i p_j + s·tr A``
#: with ``s = 0`` for ``symmetric`` (½(q p + p q) ordering), ``s = ½`` for ``p-star-q``
#: (``p_j ⋆ q^i``) and ``s = −½`` for ``q-star-p`` (``q^i ⋆ p_j``).
GL_SPLITTINGS = {"symmetric": Q(0), "p-star-q": Q(1, 2), "q-star-p": Q(-1, 2)}
DEFAULT_SPLITTING = "p-star-q"


class ShapeError(ValueError):
    """Raised on fiber-rank or matrix-rank mismatches."""


def q(i: int) -> Poly:
    return Poly.var(f"q{i}")


def p(i: int) -> Poly:
    return Poly.var(f"p{i}")


def fiber_index(name: str) -> str | None:
    """Suffix pairing ``q<k>`` with ``p<k>``; ``None`` for non-fiber variables."""
    role = var_role(name)
    if role in ("q", "p"):
        return name[1:]
    return None


def fiber_rank(f: Poly) -> int:
    """Largest fiber index occurring in ``f`` (0 if none)."""
    best = 0
    for v in f.variables():
        s = fiber_index(v)
        if s is not None:
            best = max(best, int(s) if s else 1)
    return best


def _check_rank(n: int | None, *polys: Poly) -> None:
    if n is None:
        return
    for f in polys:
        if fiber_rank(f) > n:
            raise ShapeError(f"element uses fiber index above rank {n}")


def _split(mono: tuple):
    fib, rest = [], []
    for v, e in mono:
        (fib if fiber_index(v) is not None else rest).append((v, e))
    return tuple(fib), tuple(rest)


def _ff(a: int, k: int) -> int:
    return math.perm(a, k) if 0 <= k <= a else 0


@lru_cache(maxsize=200_000)
def _star_fiber(m1: tuple, m2: tuple, c: Fraction) -> tuple:
    """Star product of two pure fiber monomials, as a tuple of (monomial, coeff)."""
    d1, d2 = dict(m1), dict(m2)
    idx = sorted({fiber_index(v) for v in itertools.chain(d1, d2)}, key=lambda s: int(s) if s else 1)
    per_index = []
    for s in idx:
        qn, pn = "q" + s, "p" + s
        al, be = d1.get(qn, 0), d1.get(pn, 0)
        ga, de = d2.get(qn, 0), d2.get(pn, 0)
        opts = []
        # a: number of (∂p ⊗ ∂q) factors, b: number of (∂q ⊗ ∂p) factors
        for a in range(min(be, ga) + 1):
            for b in range(min(al, de) + 1):
                coef = c ** (a + b) * (-1) ** b / (math.factorial(a) * math.factorial(b))
                coef *= _ff(be, a) * _ff(ga, a) * _ff(al, b) * _ff(de, b)
                if coef:
                    opts.append((coef, qn, al + ga - a - b, pn, be + de - a - b))
        per_index.append(opts)
    out: dict = {}
    for combo in itertools.product(*per_index):
        coef = Fraction(1)
        exps = []
        for cf, qn, qe, pn, pe in combo:
            coef *= cf
            if qe:
                exps.append((qn, qe))
            if pe:
                exps.append((pn, pe))
        mono = tuple(sorted(exps, key=lambda ve: var_key(ve[0])))
        out[mono] = out.get(mono, 0) + coef
    return tuple((m, v) for m, v in out.items() if v)


def moyal(f: Poly, g: Poly, convention: str = DEFAULT_MOYAL, n: int | None = None) -> Poly:
    """Moyal–Weyl star product ``f ⋆ g``."""
    f, g = Poly.coerce(f), Poly.coerce(g)
    _check_rank(n, f, g)
    c = MOYAL_SCALE[convention]
    out: dict = {}
    for m1, c1 in f.items():
        fib1, rest1 = _split(m1)
        for m2, c2 in g.items():
            fib2, rest2 = _split(m2)
            rest = dict(rest1)
            for v, e in rest2:
                rest[v] = rest.get(v, 0) + e
            for fm, cf in _star_fiber(fib1, fib2, c):
                d = dict(fm)
                d.update(rest)
                mono = tuple(sorted(d.items(), key=lambda ve: var_key(ve[0])))
                out[mono] = out.get(mono, 0) + c1 * c2 * cf
    return Poly({m: v for m, v in out.items() if v})


def star_commutator(f: Poly, g: Poly, convention: str = DEFAULT_MOYAL, n: int | None = None) -> Poly:
    return moyal(f, g, convention, n) - moyal(g, f, convention, n)


def bidegree(f: Poly) -> set:
    """Set of (q-degree, p-degree) pairs occurring in ``f``."""
    out = set()
    for m, _ in f.items():
        out.add(
            (
                sum(e for v, e in m if var_role(v) == "q"),
                sum(e for v, e in m if var_role(v) == "p"),
            )
        )
    return out


def apply_pi_pair(slot_i: int, slot_j: int, tensor: Sequence[Poly], n: int) -> list:
    """Apply ``π_{ji}``: first tensor factor of π on slot ``j``, second on slot ``i``.

    Returns a list of tensors (tuples of Poly) whose sum is the result.
    """
    L = len(tensor)
    if not (0 <= slot_i < L and 0 <= slot_j < L) or slot_i == slot_j:
        raise IndexError("slots out of range or equal")
    out = []
    for k in range(1, n + 1):
        for first, second, sign in ((f"p{k}", f"q{k}", 1), (f"q{k}", f"p{k}", -1)):
            a = tensor[slot_j].diff(first)
            b = tensor[slot_i].diff(second)
            if a and b:
                t = list(tensor)
                t[slot_j] = a.scale(sign)
                t[slot_i] = b
                out.append(tuple(t))
    return out


# ---------------------------------------------------------------------------
# Matrices over W_n and the gl_n ⊕ gl_r projection
# ---------------------------------------------------------------------------
class MatrixWeyl:
    """r×r matrix of Weyl elements, multiplied slotwise with the star product."""

    __slots__ = ("entries", "r")

    def __init__(self, entries):
        rows = [tuple(Poly.coerce(x) for x in row) for row in entries]
        r = len(rows)
        if any(len(row) != r for row in rows):
            raise ShapeError("matrix must be square")
        self.entries = tuple(rows)
        self.r = r

    @classmethod
    def scalar(cls, f: Poly, r: int = 1) -> "MatrixWeyl":
        f = Poly.coerce(f)
        return cls([[f if i == j else Poly() for j in range(r)] for i in range(r)])

    @classmethod
    def constant(cls, M) -> "MatrixWeyl":
        return cls([[Poly.const(x) for x in row] for row in M])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def _check(self, other):
        if self.r != other.r:
            raise ShapeError(f"matrix ranks {self.r} and {other.r} differ")

    def __add__(self, other):
        self._check(other)
        return MatrixWeyl([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check(other)
        return MatrixWeyl([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __neg__(self):
        return MatrixWeyl([[-a for a in row] for row in self.entries])

    def scale(self, c):
        return MatrixWeyl([[a * c for a in row] for row in self.entries])

    def star(self, other, convention: str = DEFAULT_MOYAL) -> "MatrixWeyl":
        self._check(other)
        r = self.r
        return MatrixWeyl(
            [
                [
                    sum((moyal(self.entries[i][k], other.entries[k][j], convention) for k in range(r)), Poly())
                    for j in range(r)
                ]
                for i in range(r)
            ]
        )

    def commutator(self, other, convention: str = DEFAULT_MOYAL) -> "MatrixWeyl":
        return self.star(other, convention) - other.star(self, convention)

    def trace(self) -> Poly:
        return sum((self.entries[i][i] for i in range(self.r)), Poly())

    def is_zero(self) -> bool:
        return all(not a for row in self.entries for a in row)

    def __eq__(self, other):
        return isinstance(other, MatrixWeyl) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"MatrixWeyl({[[str(a) for a in row] for row in self.entries]})"


def _mat(rows) -> tuple:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _zeros(k: int) -> tuple:
    return tuple(tuple(Fraction(0) for _ in range(k)) for _ in range(k))


def _mat_mul(A, B):
    k = len(A)
    return tuple(tuple(sum((A[i][l] * B[l][j] for l in range(k)), Fraction(0)) for j in range(k)) for i in range(k))


def _mat_sub(A, B):
    return tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(A, B))


@dataclass(frozen=True)
class GlPair:
    """An element ``(A, M)`` of ``gl_n ⊕ gl_r`` with exact rational entries."""

    A: tuple
    M: tuple

    @classmethod
    def make(cls, A, M) -> "GlPair":
        return cls(_mat(A), _mat(M))

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def r(self) -> int:
        return len(self.M)

    def bracket(self, other: "GlPair") -> "GlPair":
        return GlPair(
            _mat_sub(_mat_mul(self.A, other.A), _mat_mul(other.A, self.A)),
            _mat_sub(_mat_mul(self.M, other.M), _mat_mul(other.M, self.M)),
        )

    def __add__(self, other):
        return GlPair(
            tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.A, other.A)),
            tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.M, other.M)),
        )

    def __sub__(self, other):
        return GlPair(_mat_sub(self.A, other.A), _mat_sub(self.M, other.M))

    def scale(self, c) -> "GlPair":
        return GlPair(
            tuple(tuple(a * c for a in row) for row in self.A),
            tuple(tuple(a * c for a in row) for row in self.M),
        )

    def is_zero(self) -> bool:
        return all(not a for row in self.A + self.M for a in row)

    @classmethod
    def zero(cls, n: int, r: int) -> "GlPair":
        return cls(_zeros(n), _zeros(r))


def embed_gl(pair: GlPair, convention: str = DEFAULT_MOYAL, splitting: str = DEFAULT_SPLITTING) -> MatrixWeyl:
    """Image of ``(A, M)`` in ``M_r(W_n)``.

    ``A`` maps to ``Σ A_ij q^i p_j + s·tr A`` (``s`` set by the splitting)
    times the identity matrix; ``M`` maps to the constant matrix ``M``.
    """
    n, r = pair.n, pair.r
    w = Poly()
    for i in range(n):
        for j in range(n):
            if pair.A[i][j]:
                w = w + (q(i + 1) * p(j + 1)).scale(pair.A[i][j])
    shift = _shift(splitting)
    w = w + Poly.const(shift * sum((pair.A[i][i] for i in range(n)), Fraction(0)))
    return MatrixWeyl.scalar(w, r) + MatrixWeyl.constant(pair.M)


def project_gl(e, n: int, splitting: str = DEFAULT_SPLITTING) -> GlPair:
    """Projection ``M_r(W_n) → gl_n ⊕ gl_r``.

    The gl_n block reads the coefficients of ``q^i p_j`` in ``tr(e)/r``; the gl_r block
    is the matrix of constant terms, corrected by ``−s·tr(A)·1`` so that the projection inverts :func:`embed_gl`.
    Everything else is discarded.  Plain polynomials are treated as 1×1 matrices.
    """
    if not isinstance(e, MatrixWeyl):
        e = MatrixWeyl.scalar(Poly.coerce(e), 1)
    r = e.r
    tr = e.trace()
    A = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            A[i][j] = tr.coefficient({f"q{i + 1}": 1, f"p{j + 1}": 1}, _fiber_names(n)).const_term() / r
    M = [[e[i, j].const_term() for j in range(r)] for i in range(r)]
    shift = _shift(splitting) * sum((A[i][i] for i in range(n)), Fraction(0))
    for i in range(r):
        M[i][i] -= shift
    return GlPair.make(A, M)


def _shift(splitting: str) -> Fraction:
    try:
        return GL_SPLITTINGS[splitting]
    except KeyError:
        raise ValueError(f"unknown gl splitting {splitting!r}") from None


@lru_cache(maxsize=None)
def _fiber_names(n: int) -> tuple:
    return tuple([f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)])
