"""PBW maps for an L-connection, the Fedosov element and the derivative of PBW.

Everything is computed on the generating series ``G = Σ_β G_β q^β`` with
``G_β ∈ U``: ``G = exp(𝒟)(1)`` where

    𝒟(H) = Σ_a q^a e_a·H − Σ_{a,b,c} Γ_ab^c q^a q^b ∂H/∂q^c .

Then ``j(φ) = Σ_β φ(G_β) q^β`` is the dual PBW map on jets, ``j*(p^α) = α! G_α``
is the PBW map into ``U``, and the two are dual under ``⟨q^β, p^α⟩ = α! δ_αβ``.
A coefficient module ``E = R^s`` with connection ``Γ^E`` adds the term
``Σ_a q^a Γ^E[a][k'][m] H[k'][k]`` to the ``(m, k)`` entry of a matrix-valued
series, giving the twisted map ``j_E``.

Fiber coordinates are named ``q1..qr`` (dual frame) and ``p1..pr`` (frame).
Operators on ``Ŝym(L^∨) ⊗ E`` are first order: a vector field over base and
fiber variables together with an ``s × s`` matrix of functions.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .algebroid import Connection, Presentation
from .chernweil import TruncationError
from .envelope import Envelope, JetTable, UElement, coproduct, jet_product, multi_indices
from .scalar import Poly, _antiderivative
from .weyl import MatrixWeyl, moyal

__all__ = [
    "qname",
    "pname",
    "qmono",
    "qsplit",
    "FirstOrder",
    "PBW",
    "FedosovForm",
    "fedosov_A",
    "nabla_operator",
    "mc_terms",
    "theta_operator",
    "exp_derivation",
    "symmetrize",
    "qtrunc",
    "qnames",
    "pmono",
    "psplit",
    "transport_symbol",
    "jet_apply_D",
    "dga_residue",
    "path_ordered_transport",
    "ncpbw_residue",
]


def qname(a: int) -> str:
    return f"q{a + 1}"


def pname(a: int) -> str:
    return f"p{a + 1}"


def qmono(beta: Sequence[int]) -> Poly:
    return Poly.monomial({qname(a): e for a, e in enumerate(beta) if e})


def pmono(alpha: Sequence[int]) -> Poly:
    return Poly.monomial({pname(a): e for a, e in enumerate(alpha) if e})


def qnames(r: int) -> tuple:
    return tuple(qname(a) for a in range(r))


def qsplit(f: Poly, r: int) -> dict:
    """``{β: coefficient}`` splitting of ``f`` by its ``q``-monomials."""
    pos = {qname(a): a for a in range(r)}
    out: dict = {}
    for mono, c in Poly.coerce(f).items():
        beta = [0] * r
        rest = []
        for v, e in mono:
            if v in pos:
                beta[pos[v]] = e
            else:
                rest.append((v, e))
        key = tuple(beta)
        out[key] = out.get(key, Poly()) + Poly({tuple(rest): c})
    return {k: v for k, v in out.items() if v}


def psplit(f: Poly, r: int) -> dict:
    pos = {pname(a): a for a in range(r)}
    out: dict = {}
    for mono, c in Poly.coerce(f).items():
        alpha = [0] * r
        rest = []
        for v, e in mono:
            if v in pos:
                alpha[pos[v]] = e
            else:
                rest.append((v, e))
        key = tuple(alpha)
        out[key] = out.get(key, Poly()) + Poly({tuple(rest): c})
    return {k: v for k, v in out.items() if v}


def qtrunc(f: Poly, r: int, N: int) -> Poly:
    return Poly.coerce(f).truncate(N, qnames(r))


def _fact(beta) -> int:
    return math.prod(math.factorial(b) for b in beta)


# ---------------------------------------------------------------------------
# first-order operators
# ---------------------------------------------------------------------------
class FirstOrder:
    """``δ + M``: a vector field ``δ`` (``{variable: coefficient}``) plus an ``s × s`` matrix.

    On ``g f_m`` it acts as ``δ(g) f_m + g Σ_{m'} M[m'][m] f_{m'}``.
    """

    __slots__ = ("vf", "mat", "s")

    def __init__(self, vf: dict | None = None, mat=None, s: int = 1):
        self.vf = {v: Poly.coerce(c) for v, c in (vf or {}).items() if Poly.coerce(c)}
        self.s = s
        if mat is None:
            mat = [[Poly() for _ in range(s)] for _ in range(s)]
        self.mat = tuple(tuple(Poly.coerce(x) for x in row) for row in mat)

    def apply(self, g: Poly) -> Poly:
        """The vector-field part on a scalar function."""
        out = Poly()
        for v, c in self.vf.items():
            d = g.diff(v)
            if d:
                out = out + c * d
        return out

    def apply_vec(self, vec: Sequence[Poly]) -> list:
        out = [self.apply(Poly.coerce(g)) for g in vec]
        for mp in range(self.s):
            for m in range(self.s):
                if self.mat[mp][m] and vec[m]:
                    out[mp] = out[mp] + self.mat[mp][m] * vec[m]
        return out

    def __add__(self, other: "FirstOrder") -> "FirstOrder":
        vf = dict(self.vf)
        for v, c in other.vf.items():
            vf[v] = vf.get(v, Poly()) + c
        mat = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.mat, other.mat)]
        return FirstOrder(vf, mat, self.s)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "FirstOrder":
        c = Poly.coerce(c)
        return FirstOrder({v: c * x for v, x in self.vf.items()}, [[c * x for x in row] for row in self.mat], self.s)

    def commutator(self, other: "FirstOrder") -> "FirstOrder":
        vf: dict = {}
        for v in set(self.vf) | set(other.vf):
            c = other.apply(self.vf.get(v, Poly())) * -1 + self.apply(other.vf.get(v, Poly()))
            if c:
                vf[v] = c
        s = self.s
        mat = []
        for i in range(s):
            row = []
            for k in range(s):
                acc = self.apply(other.mat[i][k]) - other.apply(self.mat[i][k])
                for l in range(s):
                    acc = acc + self.mat[i][l] * other.mat[l][k] - other.mat[i][l] * self.mat[l][k]
                row.append(acc)
            mat.append(row)
        return FirstOrder(vf, mat, s)

    def map(self, f) -> "FirstOrder":
        return FirstOrder({v: f(c) for v, c in self.vf.items()}, [[f(x) for x in row] for row in self.mat], self.s)

    def truncate(self, r: int, N: int) -> "FirstOrder":
        return self.map(lambda c: qtrunc(c, r, N))

    def diff(self, var: str) -> "FirstOrder":
        return self.map(lambda c: c.diff(var))

    def is_zero(self) -> bool:
        return not self.vf and not any(x for row in self.mat for x in row)

    def __eq__(self, other):
        return isinstance(other, FirstOrder) and self.vf == other.vf and self.mat == other.mat

    def __hash__(self):
        return hash((frozenset(self.vf.items()), self.mat))

    def symbol(self, r: int):
        """Weyl symbol ``Σ_c δ^c ⋆ p_c + M`` (a :class:`Poly` when ``s = 1``)."""
        fiber = set(qnames(r))
        if any(v not in fiber for v in self.vf):
            raise ValueError("only fiber vector fields have Weyl symbols")
        base = Poly()
        for a in range(r):
            c = self.vf.get(qname(a))
            if c:
                base = base + moyal(c, Poly.var(pname(a)))
        if self.s == 1:
            return base + self.mat[0][0]
        return MatrixWeyl(
            [[(base if i == k else Poly()) + self.mat[i][k] for k in range(self.s)] for i in range(self.s)]
        )

    def __str__(self):
        parts = [f"({c})*d/d{v}" for v, c in sorted(self.vf.items())]
        if any(x for row in self.mat for x in row):
            parts.append("M" + str([[str(x) for x in row] for row in self.mat]))
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def nabla_operator(pres: Presentation, conn: Connection, a: int, econn: Connection | None = None) -> FirstOrder:
    """``∇_a`` on ``Ŝym(L^∨) ⊗ E``: anchor on the base, ``∇_a q^c = −Σ_b Γ_ab^c q^b``, and ``Γ^E_a``."""
    vf: dict = {}
    for j, v in enumerate(pres.variables):
        if pres.anchor[a][j]:
            vf[v] = pres.anchor[a][j]
    for c in range(pres.rank):
        acc = Poly()
        for b in range(pres.rank):
            g = conn.G(a, b, c)
            if g:
                acc = acc - g * Poly.var(qname(b))
        if acc:
            vf[qname(c)] = acc
    s = econn.module_rank if econn is not None else 1
    mat = [[Poly() for _ in range(s)] for _ in range(s)]
    if econn is not None:
        for m in range(s):
            for mp in range(s):
                mat[mp][m] = econn.G(a, m, mp)
    return FirstOrder(vf, mat, s)


# ---------------------------------------------------------------------------
# PBW maps
# ---------------------------------------------------------------------------
class PBW:
    """PBW data of ``(pres, conn)`` with an optional coefficient connection ``econn``."""

    def __init__(self, pres: Presentation, conn: Connection, econn: Connection | None = None, env: Envelope | None = None):
        if conn.module_rank != pres.rank:
            raise ValueError("the PBW connection must be an L-connection")
        self.pres = pres
        self.conn = conn
        self.econn = econn
        self.r = pres.rank
        self.s = econn.module_rank if econn is not None else 1
        self.env = env or Envelope(pres)
        zero = (0,) * self.r
        self._G = [{zero: self.env.one()}]
        s = self.s
        self._GE = [{(m, k): ({zero: self.env.one()} if m == k else {}) for m in range(s) for k in range(s)}]
        self._inv_cache: dict = {}

    # -- generating series -------------------------------------------------
    def _D(self, layer: dict, d: int) -> dict:
        """``𝒟`` on one homogeneous layer ``{β: UElement}``, divided by ``d + 1``."""
        env, r = self.env, self.r
        out: dict = {}

        def add(beta, u):
            if u:
                out[beta] = out[beta] + u if beta in out else u

        for beta, u in layer.items():
            for a in range(r):
                b2 = beta[:a] + (beta[a] + 1,) + beta[a + 1 :]
                add(b2, UElement(env, env.gen_times(a, u.terms)))
            for c in range(r):
                if not beta[c]:
                    continue
                for a in range(r):
                    for b in range(r):
                        g = self.conn.G(a, b, c)
                        if not g:
                            continue
                        nb = list(beta)
                        nb[c] -= 1
                        nb[a] += 1
                        nb[b] += 1
                        add(tuple(nb), u.scale(g * -beta[c]))
        f = Fraction(1, d + 1)
        return {k: v.scale(f) for k, v in out.items() if v}

    def G(self, d: int) -> dict:
        while len(self._G) <= d:
            self._G.append(self._D(self._G[-1], len(self._G) - 1))
        return self._G[d]

    def GE(self, d: int) -> dict:
        """Twisted series: ``(m, k) → {β: UElement}`` in degree ``d``."""
        while len(self._GE) <= d:
            prev = self._GE[-1]
            n = len(self._GE) - 1
            nxt = {}
            for (m, k), layer in prev.items():
                nxt[(m, k)] = self._D(layer, n)
            if self.econn is not None:
                f = Fraction(1, n + 1)
                for m in range(self.s):
                    for k in range(self.s):
                        tgt = nxt[(m, k)]
                        for kp in range(self.s):
                            for beta, u in prev[(kp, k)].items():
                                for a in range(self.r):
                                    g = self.econn.G(a, kp, m)
                                    if g:
                                        b2 = beta[:a] + (beta[a] + 1,) + beta[a + 1 :]
                                        v = u.scale(g * f)
                                        tgt[b2] = tgt[b2] + v if b2 in tgt else v
                        nxt[(m, k)] = {b: v for b, v in tgt.items() if v}
            self._GE.append(nxt)
        return self._GE[d]

    # -- dual PBW --------------------------------------------------------------
    def j(self, phi: JetTable, N: int) -> Poly:
        """``j(φ) = Σ_{|β|≤N} φ(G_β) q^β``."""
        if phi.order < N:
            raise TruncationError(f"j to degree {N} needs jets of order N >= {N}, have {phi.order}")
        out = Poly()
        for d in range(N + 1):
            for beta, u in self.G(d).items():
                v = phi(u)
                if v:
                    out = out + v * qmono(beta)
        return out

    def jE(self, phis: Sequence[JetTable], N: int) -> list:
        """Twisted dual PBW on an ``E``-valued jet given by its ``s`` components."""
        if any(p.order < N for p in phis):
            raise TruncationError(f"j_E to degree {N} needs jets of order N >= {N}")
        out = [Poly() for _ in range(self.s)]
        for d in range(N + 1):
            for (m, k), layer in self.GE(d).items():
                for beta, u in layer.items():
                    v = phis[k](u)
                    if v:
                        out[m] = out[m] + v * qmono(beta)
        return out

    def j_inverse(self, alpha: Poly, N: int) -> JetTable:
        return self.jE_inverse([alpha], N, twisted=False)[0]

    def jE_inverse(self, vec: Sequence[Poly], N: int, twisted: bool = True) -> list:
        """Triangular inversion: the top part of ``G_β`` is ``e^β/β!``."""
        key = (tuple(vec), N, twisted)
        hit = self._inv_cache.get(key)
        if hit is not None:
            return hit
        s = len(vec)
        coeffs = [qsplit(v, self.r) for v in vec]
        vals = [dict() for _ in range(s)]
        for d in range(N + 1):
            if twisted:
                layer = self.GE(d)
            else:
                layer = {(0, 0): self.G(d)}
            for beta in multi_indices(self.r, d):
                for m in range(s):
                    acc = coeffs[m].get(beta, Poly())
                    for k in range(s):
                        u = layer.get((m, k), {}).get(beta)
                        if u is None:
                            continue
                        for a, f in u.terms.items():
                            if sum(a) < d:
                                v = vals[k].get(a)
                                if v:
                                    acc = acc - f * v
                    if acc:
                        vals[m][beta] = acc.scale(_fact(beta))
        res = [JetTable(self.env, N, v) for v in vals]
        self._inv_cache[key] = res
        return res

    # -- PBW into U --------------------------------------------------------------
    def j_star(self, alpha: Poly) -> UElement:
        """``j*(Σ f_α p^α) = Σ f_α α! G_α`` (coefficients on the left)."""
        out = self.env.zero()
        for a, f in psplit(alpha, self.r).items():
            u = self.G(sum(a)).get(a)
            if u:
                out = out + u.scale(f * _fact(a))
        return out

    def nabla_sym(self, a: int, alpha: Poly) -> Poly:
        """``∇_a`` on ``Sym(L)``: ``∇_a p_b = Σ_c Γ_ab^c p_c`` plus the anchor on coefficients."""
        alpha = Poly.coerce(alpha)
        out = Poly()
        for j, v in enumerate(self.pres.variables):
            if self.pres.anchor[a][j]:
                out = out + self.pres.anchor[a][j] * alpha.diff(v)
        for b in range(self.r):
            d = alpha.diff(pname(b))
            if not d:
                continue
            for c in range(self.r):
                g = self.conn.G(a, b, c)
                if g:
                    out = out + d * g * Poly.var(pname(c))
        return out

    def flat_action(self, phi: JetTable, a: int) -> JetTable:
        return phi.nabla_flat(a)


def symmetrize(env: Envelope, word: Sequence[int]) -> UElement:
    """``1/k! Σ_σ e_{w_σ(1)}⋯e_{w_σ(k)}`` in normal form."""
    from itertools import permutations

    from .envelope import normal_order

    k = len(word)
    out = env.zero()
    for perm in permutations(range(k)):
        out = out + normal_order([word[i] for i in perm], env)
    return out.scale(Fraction(1, math.factorial(k)))


# ---------------------------------------------------------------------------
# Fedosov element
# ---------------------------------------------------------------------------
class FedosovForm:
    """``A = Σ_a A_a ε^a`` with each ``A_a`` a first-order operator, known to ``q``-degree ``N``."""

    def __init__(self, r: int, s: int, ops: Sequence[FirstOrder], order: int):
        self.r = r
        self.s = s
        self.ops = list(ops)
        self.order = order

    def symbol(self, a: int):
        return self.ops[a].symbol(self.r)

    def component(self, k: int, a: int):
        """Part of weight ``k = deg_q − deg_p`` of the symbol of ``A_a``."""
        sym = self.symbol(a)
        if isinstance(sym, MatrixWeyl):
            return MatrixWeyl([[_weight_part(x, k, self.r) for x in row] for row in sym.entries])
        return _weight_part(sym, k, self.r)

    def weights(self) -> list:
        ws = set()
        for a in range(self.r):
            sym = self.symbol(a)
            polys = [x for row in sym.entries for x in row] if isinstance(sym, MatrixWeyl) else [sym]
            for f in polys:
                for mono, _ in f.items():
                    ws.add(_mono_weight(mono))
        return sorted(ws)

    def perturb(self, a: int, extra: FirstOrder) -> "FedosovForm":
        ops = list(self.ops)
        ops[a] = ops[a] + extra
        return FedosovForm(self.r, self.s, ops, self.order)


def _mono_weight(mono) -> int:
    from .scalar import var_role

    w = 0
    for v, e in mono:
        role = var_role(v)
        if role == "q":
            w += e
        elif role == "p":
            w -= e
    return w


def _weight_part(f: Poly, k: int, r: int) -> Poly:
    return Poly({m: c for m, c in Poly.coerce(f).items() if _mono_weight(m) == k})


def fedosov_A(pbw: PBW, N: int) -> FedosovForm:
    """``A_a = j ∇'_a j^{-1} − ∇_a`` on generators ``q^c`` (and ``f_m`` when twisted), to ``q``-degree ``N``."""
    r, s = pbw.r, pbw.s
    conn = pbw.conn
    ops = []
    for a in range(r):
        vf = {}
        for c in range(r):
            phi = pbw.j_inverse(Poly.var(qname(c)), N + 1)
            val = pbw.j(phi.nabla_flat(a), N)
            for b in range(r):
                g = conn.G(a, b, c)
                if g:
                    val = val + g * Poly.var(qname(b))
            if val:
                vf[qname(c)] = val
        mat = [[Poly() for _ in range(s)] for _ in range(s)]
        if pbw.econn is not None:
            for m in range(s):
                vec = [Poly.const(1 if k == m else 0) for k in range(s)]
                phis = pbw.jE_inverse(vec, N + 1)
                image = pbw.jE([p.nabla_flat(a) for p in phis], N)
                for mp in range(s):
                    mat[mp][m] = image[mp] - pbw.econn.G(a, m, mp)
        ops.append(FirstOrder(vf, mat, s))
    return FedosovForm(r, s, ops, N)


def mc_terms(pbw: PBW, A: FedosovForm, N: int | None = None) -> dict:
    """Per pair ``a < b``: the terms ``R``, ``∇A``, ``½[A, A]`` and their sum, truncated at degree ``N``.

    ``N`` defaults to ``A.order − 1``, the highest degree the truncated ``A`` determines.
    """
    r = pbw.r
    N = A.order - 1 if N is None else N
    pres = pbw.pres
    nab = [nabla_operator(pres, pbw.conn, a, pbw.econn) for a in range(r)]
    out = {}
    for a in range(r):
        for b in range(a + 1, r):
            R = nab[a].commutator(nab[b])
            dA = nab[a].commutator(A.ops[b]) - nab[b].commutator(A.ops[a])
            for k in range(r):
                c = pres.c(a, b, k)
                if c:
                    R = R - nab[k].scale(c)
                    dA = dA - A.ops[k].scale(c)
            AA = A.ops[a].commutator(A.ops[b])
            terms = {
                "curvature": R.truncate(r, N),
                "nabla_A": dA.truncate(r, N),
                "half_bracket": AA.truncate(r, N),
            }
            terms["residue"] = (terms["curvature"] + terms["nabla_A"] + terms["half_bracket"]).truncate(r, N)
            out[(a, b)] = terms
    return out


# ---------------------------------------------------------------------------
# derivative of PBW along a family of connections
# ---------------------------------------------------------------------------
def theta_operator(pbw_t: PBW, N: int, tvar: str = "t") -> FirstOrder:
    """``θ = (∂_t j_t) ∘ j_t^{-1}`` on generators; ``pbw_t`` uses a connection polynomial in ``tvar``."""
    r = pbw_t.r
    vf = {}
    for c in range(r):
        phi = pbw_t.j_inverse(Poly.var(qname(c)), N)
        out = Poly()
        for d in range(N + 1):
            for beta, u in pbw_t.G(d).items():
                du = UElement(u.env, {k: v.diff(tvar) for k, v in u.terms.items()})
                v = phi(du)
                if v:
                    out = out + v * qmono(beta)
        if out:
            vf[qname(c)] = out
    return FirstOrder(vf, None, 1)


def exp_derivation(op: FirstOrder, f: Poly, r: int, N: int) -> Poly:
    """``exp(δ) f`` truncated at ``q``-degree ``N`` for a degree-raising fiber derivation ``δ``."""
    out = Poly()
    term = qtrunc(f, r, N)
    k = 0
    while term:
        out = out + term
        k += 1
        term = qtrunc(op.apply(term), r, N).scale(Fraction(1, k))
    return out


def jet_apply_D(phi: JetTable, D: UElement) -> JetTable:
    """``(D ·₂ φ)(E) = φ(E D)``; loses ``filtration(D)`` orders."""
    f = max(D.filtration, 0)
    if phi.order < f:
        raise TruncationError(f"acting by a filtration-{f} element needs jet order N >= {f}")
    env = phi.env
    return JetTable.from_function(env, phi.order - f, lambda a: phi(env.mono(a) * D))


def transport_symbol(pbw: PBW, D: UElement, N: int):
    """Weyl symbol of ``K_D = j_E ∘ (D ·₂) ∘ j_E^{-1}``, ``q``-degree ``≤ N``.

    ``K_D = Σ_β g_β ∂_q^β`` has order ``≤ filtration(D)``; the ``g_β`` are read off
    triangularly from the action on ``q^γ f_k`` and the symbol is ``Σ g_β ⋆ p^β``.
    """
    r, s = pbw.r, pbw.s
    f = max(D.filtration, 0)
    M = N + f
    twisted = pbw.econn is not None
    coeffs = [[dict() for _ in range(s)] for _ in range(s)]  # [m'][k] -> {β: g}
    for d in range(f + 1):
        for gamma in multi_indices(r, d):
            for k in range(s):
                vec = [qmono(gamma) if kk == k else Poly() for kk in range(s)]
                if twisted:
                    phis = pbw.jE_inverse(vec, M + f)
                    img = pbw.jE([jet_apply_D(p, D) for p in phis], M)
                else:
                    phi = pbw.j_inverse(vec[0], M + f)
                    img = [pbw.j(jet_apply_D(phi, D), M)]
                for mp in range(s):
                    acc = img[mp]
                    for beta, g in coeffs[mp][k].items():
                        if all(b <= c for b, c in zip(beta, gamma)):
                            fall = math.prod(math.factorial(c) // math.factorial(c - b) for b, c in zip(beta, gamma))
                            rest = tuple(c - b for b, c in zip(beta, gamma))
                            acc = acc - (g * qmono(rest)).scale(fall)
                    acc = qtrunc(acc, r, M)
                    if acc:
                        coeffs[mp][k][gamma] = acc.scale(Fraction(1, _fact(gamma)))
    entries = []
    for mp in range(s):
        row = []
        for k in range(s):
            sym = Poly()
            for beta, g in coeffs[mp][k].items():
                sym = sym + moyal(g, pmono(beta))
            row.append(qtrunc(sym, r, N))
        entries.append(row)
    if s == 1:
        return entries[0][0]
    return MatrixWeyl(entries)


def dga_residue(phi: JetTable, psi: JetTable, a: int) -> JetTable:
    """``∇'_a(φψ) − (∇'_aφ)ψ − φ(∇'_aψ)``; zero because the flat differential is a derivation."""
    lhs = jet_product(phi, psi).nabla_flat(a)
    rhs = jet_product(phi.nabla_flat(a), psi) + jet_product(phi, psi.nabla_flat(a))
    return lhs - rhs


def path_ordered_transport(pbw_t: PBW, f: Poly, N: int, tvar: str = "t") -> Poly:
    """Solve ``∂_t F = θ_t F`` with ``F(0) = f`` by Picard iteration and return ``F(1)``.

    ``θ_t`` raises the ``q``-degree, so ``N + 1`` iterations are exact to degree ``N``.
    Applied to ``j_0(φ)`` this reproduces ``j_1(φ)``.
    """
    r = pbw_t.r
    theta = theta_operator(pbw_t, N, tvar)
    f = qtrunc(f, r, N)
    F = f
    for _ in range(N + 1):
        prim = _antiderivative(qtrunc(theta.apply(F), r, N), tvar)
        F = f + prim - prim.subs({tvar: 0})
    return F.subs({tvar: 1})


def ncpbw_residue(pbw: PBW, phi: JetTable, D: UElement, psi: JetTable, E: UElement, N: int) -> Poly:
    """Compare the jet-side operator product with the star product of Weyl symbols.

    The operator ``φ⊗D`` acts on jets by ``χ ↦ φ·(D·₂χ)``; composing two of them gives
    ``Σ φ·(D₍₁₎·₂ψ) ⊗ D₍₂₎E``.  Through ``j`` each side becomes a symbol, and the
    noncommutative PBW theorem says the symbols multiply by ``⋆``.  Returns the
    difference truncated at ``q``-degree ``N − filtration(D) − filtration(E)``,
    the range the truncated data determines.
    """
    if pbw.s != 1:
        raise NotImplementedError("operator products are compared for untwisted data only")
    r = pbw.r
    fD, fE = max(D.filtration, 0), max(E.filtration, 0)
    M = N + fD + fE
    env = pbw.env
    left = moyal(moyal(pbw.j(phi, M), transport_symbol(pbw, D, M)), moyal(pbw.j(psi, M), transport_symbol(pbw, E, M)))
    right = Poly()
    for (beta, gamma), c in coproduct(D).items():
        d1 = env.mono(beta, c)
        d2 = env.mono(gamma)
        acted = jet_apply_D(psi, d1)
        coeff = pbw.j(jet_product(phi, acted), M - fD)
        right = right + moyal(coeff, transport_symbol(pbw, d2 * E, M))
    return qtrunc(left - right, r, N - fD - fE)
