"""Invariant polynomials (Todd, Chern character), the curvature cochain of a
projection onto ``gl_n ⊕ gl_r``, the Chern–Weil map χ, and Chern–Weil forms of
Lie algebroid connections with their transgression along an affine family.

Todd is computed as ``det f(X) = ε·exp(Σ_j g_j tr(X^j))`` where ``g`` is the
series of ``log`` of the normalized generating function, so no symbolic
determinant of a series matrix is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Callable, Sequence

from .scalar import Poly, integrate_ordered_simplex

TD_CONVENTIONS = ("literal", "calibrated")
DEFAULT_TD = "calibrated"


class TruncationError(ValueError):
    """Raised when a series is evaluated beyond its truncation order."""


# ---------------------------------------------------------------------------
# One-variable series
# ---------------------------------------------------------------------------
def _bernoulli_like(order: int) -> list:
    """Coefficients of ``x/(1−e^{−x})`` up to ``x^order`` (series inversion)."""
    # (1 − e^{−x})/x = Σ_k (−1)^k x^k/(k+1)!
    d = [Fraction((-1) ** k, math.factorial(k + 1)) for k in range(order + 1)]
    inv = [Fraction(0)] * (order + 1)
    inv[0] = 1 / d[0]
    for k in range(1, order + 1):
        inv[k] = -sum((d[j] * inv[k - j] for j in range(1, k + 1)), Fraction(0)) / d[0]
    return inv


def _series_log(a: list) -> list:
    """log of a series with ``a[0] = 1``."""
    N = len(a) - 1
    out = [Fraction(0)] * (N + 1)
    # (log a)' = a'/a  →  k·l_k = k·a_k − Σ_{j=1}^{k-1} j·l_j·a_{k−j}
    for k in range(1, N + 1):
        out[k] = a[k] - sum((j * out[j] * a[k - j] for j in range(1, k)), Fraction(0)) / k
    return out


def td_scalar_series(order: int, convention: str = DEFAULT_TD) -> list:
    """Per-eigenvalue Todd series coefficients.

    ``calibrated``: ``x/(1−e^{−x})``; ``literal``: ``x/(1−e^{x})``.
    """
    cal = _bernoulli_like(order)
    if convention == "calibrated":
        return cal
    if convention == "literal":
        # x/(1−e^x) = −h(−x) with h the calibrated series
        return [-(c * (-1) ** k) for k, c in enumerate(cal)]
    raise ValueError(f"unknown Todd convention {convention!r}")


def ch_scalar_series(order: int) -> list:
    return [Fraction(1, math.factorial(k)) for k in range(order + 1)]


# ---------------------------------------------------------------------------
# Matrix invariant polynomials
# ---------------------------------------------------------------------------
def mat_mul(A, B):
    k = len(A)
    return [[sum((A[i][l] * B[l][j] for l in range(k)), Poly()) for j in range(k)] for i in range(k)]


def mat_trace(A) -> Poly:
    return sum((A[i][i] for i in range(len(A))), Poly())


def _power_traces(X, upto: int) -> list:
    """``[tr X^0, tr X^1, …, tr X^upto]`` with Poly entries."""
    n = len(X)
    P = [[Poly.const(1 if i == j else 0) for j in range(n)] for i in range(n)]
    out = [Poly.const(n)]
    for _ in range(upto):
        P = mat_mul(P, X)
        out.append(mat_trace(P))
    return out


@dataclass(frozen=True)
class InvariantSeries:
    """Degreewise invariant polynomial ``P = Σ_k P_k`` of one matrix argument.

    ``kind`` is ``"td"`` or ``"ch"``; degree ``k`` components are obtained from power
    traces, so they are GL-invariant by construction.
    """

    kind: str
    rank: int
    order: int
    convention: str = DEFAULT_TD

    def component(self, k: int, X) -> Poly:
        if k > self.order:
            raise TruncationError(f"component {k} requested from a series truncated at {self.order}")
        if len(X) != self.rank:
            raise ValueError(f"expected a {self.rank}x{self.rank} argument")
        X = [[Poly.coerce(x) for x in row] for row in X]
        tr = _power_traces(X, k)
        if self.kind == "ch":
            return tr[k].scale(Fraction(1, math.factorial(k)))
        if self.kind == "td":
            return _exp_trace_component(k, tr, self._log_coeffs(), self._sign())
        raise ValueError(f"unknown invariant series kind {self.kind!r}")

    def _log_coeffs(self) -> tuple:
        s = td_scalar_series(self.order, self.convention)
        s0 = s[0]
        return tuple(_series_log([c / s0 for c in s]))

    def _sign(self) -> Fraction:
        return td_scalar_series(0, self.convention)[0] ** self.rank

    def __call__(self, X) -> list:
        return [self.component(k, X) for k in range(self.order + 1)]


def _exp_trace_component(k: int, tr: list, g: Sequence[Fraction], sign) -> Poly:
    """Degree-k part of ``sign · exp(Σ_{j≥1} g_j tr X^j)``."""
    # Expand exp over partitions of k: Π_j (g_j tr_j)^{m_j}/m_j!
    total = Poly()
    for parts in _partitions(k):
        term = Poly.const(1)
        for j, m in parts.items():
            term = term * (tr[j].scale(g[j]) ** m).scale(Fraction(1, math.factorial(m)))
        total = total + term
    return total.scale(sign)


@lru_cache(maxsize=None)
def _partitions_cached(k: int, largest: int) -> tuple:
    if k == 0:
        return ((),)
    out = []
    for j in range(min(k, largest), 0, -1):
        for rest in _partitions_cached(k - j, j):
            out.append((j,) + rest)
    return tuple(out)


def _partitions(k: int):
    for p in _partitions_cached(k, k):
        d: dict = {}
        for j in p:
            d[j] = d.get(j, 0) + 1
        yield d


def td_ch_series(rank: int, truncation: int, convention: str = DEFAULT_TD, r: int | None = None):
    """Todd series on ``gl_rank`` (and, if ``r`` is given, the Chern character on ``gl_r``)."""
    td = InvariantSeries("td", rank, truncation, convention)
    if r is None:
        return td
    return td, InvariantSeries("ch", r, truncation)


# ---------------------------------------------------------------------------
# Products on gl_n ⊕ gl_r and the Chern–Weil map χ
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TdCh:
    """``Td_n(A)·Ch_r(M)`` on ``gl_n ⊕ gl_r``."""

    n: int
    r: int
    order: int
    convention: str = DEFAULT_TD

    def component(self, k: int, A, M) -> Poly:
        td = InvariantSeries("td", self.n, self.order, self.convention)
        ch = InvariantSeries("ch", self.r, self.order)
        return sum((td.component(a, A) * ch.component(k - a, M) for a in range(k + 1)), Poly())

    def polarized(self, k: int, pairs: Sequence) -> Poly:
        """Symmetric k-linear form with ``P(C,…,C) = P_k(C)``; ``pairs`` are ``(A_i, M_i)``."""
        if len(pairs) != k:
            raise ValueError("need exactly k arguments")
        if k == 0:
            return self.component(0, _zero(self.n), _zero(self.r))
        svars = [Poly.var(f"_s{i}") for i in range(k)]
        A = [[sum((Poly.coerce(pairs[i][0][a][b]) * svars[i] for i in range(k)), Poly()) for b in range(self.n)] for a in range(self.n)]
        M = [[sum((Poly.coerce(pairs[i][1][a][b]) * svars[i] for i in range(k)), Poly()) for b in range(self.r)] for a in range(self.r)]
        full = self.component(k, A, M)
        coeff = full.coefficient({f"_s{i}": 1 for i in range(k)}, [f"_s{i}" for i in range(k)])
        return coeff.scale(Fraction(1, math.factorial(k)))


def _zero(k: int):
    return [[Poly() for _ in range(k)] for _ in range(k)]


def curvature_C(X, Y, project: Callable, bracket: Callable):
    """``C(X,Y) = [π X, π Y] − π([X,Y])`` for a projection ``π`` onto ``gl_n ⊕ gl_r``."""
    return project(X).bracket(project(Y)) - project(bracket(X, Y))


def _pairings(k2: int):
    """Permutations σ of 2k with σ(2i−1) < σ(2i), with their signs."""
    from .homalg import _perm_sign

    for perm in permutations(range(k2)):
        if all(perm[2 * i] < perm[2 * i + 1] for i in range(k2 // 2)):
            yield _perm_sign(perm), perm


def chi(P: TdCh, k: int, args: Sequence, curvature: Callable) -> Poly:
    """``χ(P)(X_1,…,X_{2k}) = 1/k! Σ_{σ(2i−1)<σ(2i)} (−1)^σ P(C(X_σ1,X_σ2),…)``."""
    if len(args) != 2 * k:
        raise ValueError(f"χ of degree {k} takes {2 * k} arguments")
    if k > P.order:
        raise TruncationError(f"series truncated at order {P.order} < {k}")
    cache: dict = {}

    def C(i, j):
        if (i, j) not in cache:
            cache[(i, j)] = curvature(args[i], args[j])
        return cache[(i, j)]

    total = Poly()
    for sign, perm in _pairings(2 * k):
        pairs = []
        for i in range(k):
            g = C(perm[2 * i], perm[2 * i + 1])
            pairs.append((g.A, g.M))
        total = total + P.polarized(k, pairs).scale(sign)
    return total.scale(Fraction(1, math.factorial(k)))


# ---------------------------------------------------------------------------
# Chern–Weil forms of Lie algebroid connections
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class _MatPair:
    """Curvature values ``(R^L, R^E)`` with polynomial entries."""

    A: tuple
    M: tuple


def _curv_value(R: dict, i: int, j: int, s: int):
    if i == j:
        return [[Poly() for _ in range(s)] for _ in range(s)]
    if i < j:
        return R[(i, j)]
    return [[-x for x in row] for row in R[(j, i)]]


def _frame_pairs(pres, connL, connE):
    from .algebroid import Connection, curvature

    if connE is None:
        connE = Connection.zero(pres.rank, 1)
    return curvature(connL, pres), curvature(connE, pres), connE


def algebroid_cw(pres, connL, connE, P: TdCh, k: int):
    """Degree-2k part of ``P(R^L, R^E)`` as an :class:`~algebroid_index.algebroid.LForm`.

    ``connL`` is an L-connection on L itself; ``connE`` a connection on the twisting module
    (trivial line when None).  The form is ``χ(P)`` with ``C(e_i,e_j) = R(e_i,e_j)``.
    """
    from .algebroid import LForm

    RL, RE, connE = _frame_pairs(pres, connL, connE)
    n, s = pres.rank, connE.module_rank

    def curv(i, j):
        return _MatPair(_curv_value(RL, i, j, n), _curv_value(RE, i, j, s))

    coeffs = {idx: chi(P, k, list(idx), curv) for idx in combinations(range(pres.rank), 2 * k)}
    return LForm.make(2 * k, coeffs)


def _diff_matrix(c1, c0, i: int) -> list:
    m1, m0 = c1.matrix(i), c0.matrix(i)
    return [[a - b for a, b in zip(r1, r0)] for r1, r0 in zip(m1, m0)]


def transgression(pres, pair0, pair1, P: TdCh, k: int, tvar: str = "t"):
    """Chern–Simons form ``TP = k ∫_0^1 P(ω, R_t, …, R_t) dt`` of degree ``2k−1``.

    ``pair0`` and ``pair1`` are ``(connL, connE)`` pairs; ``ω = ∇^1 − ∇^0`` and ``R_t`` is
    the curvature of the affine family.  Satisfies ``d_L TP = P(R^1) − P(R^0)``.
    """
    from .algebroid import Connection, LForm, curvature
    from .homalg import _perm_sign

    (L0, E0), (L1, E1) = pair0, pair1
    if E0 is None:
        E0 = E1 = Connection.zero(pres.rank, 1)
    t = Poly.var(tvar)
    Lt, Et = L0.combine(L1, t), E0.combine(E1, t)
    RL, RE = curvature(Lt, pres), curvature(Et, pres)
    n, s = pres.rank, Et.module_rank
    if k < 1:
        raise ValueError("transgression forms start in degree 1")
    omega = [(_diff_matrix(L1, L0, a), _diff_matrix(E1, E0, a)) for a in range(pres.rank)]
    coeffs = {}
    for idx in combinations(range(pres.rank), 2 * k - 1):
        total = Poly()
        for perm in permutations(range(2 * k - 1)):
            if not all(perm[2 * i + 1] < perm[2 * i + 2] for i in range(k - 1)):
                continue
            args = [omega[idx[perm[0]]]]
            for i in range(k - 1):
                a, b = idx[perm[2 * i + 1]], idx[perm[2 * i + 2]]
                args.append((_curv_value(RL, a, b, n), _curv_value(RE, a, b, s)))
            total = total + P.polarized(k, args).scale(_perm_sign(perm))
        total = total.scale(Fraction(k, math.factorial(k - 1)))
        coeffs[idx] = integrate_ordered_simplex(total, 1, [tvar])
    return LForm.make(2 * k - 1, coeffs)
