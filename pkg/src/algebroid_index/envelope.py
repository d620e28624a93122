"""Universal enveloping algebra of a free Lie–Rinehart presentation, and jets.

An element of ``U`` is stored in PBW normal form ``Σ_α f_α e^α`` with base
coefficients written on the left and ``e^α = e_1^{α_1}⋯e_r^{α_r}``.  Normal
ordering only ever needs ``e_i · e^α``; that product is computed recursively
(swap ``e_i`` past the leading generator, emit the bracket) and memoized per
presentation.

A jet ``φ ∈ Hom_R(U, R)`` is stored by its values on the PBW basis up to a
truncation order ``N``.
"""

from __future__ import annotations

import math
import re
import threading
from typing import Iterable, Sequence

from .algebroid import Presentation
from .chernweil import TruncationError
from .scalar import Poly, parse_poly

__all__ = [
    "Envelope",
    "UElement",
    "JetTable",
    "normal_order",
    "u_mul",
    "coproduct",
    "multi_indices",
    "format_multi_index",
    "parse_multi_index",
    "jet_product",
]


def _add(d: dict, key, c: Poly) -> None:
    if c:
        v = d.get(key, Poly()) + c
        if v:
            d[key] = v
        else:
            d.pop(key, None)


def multi_indices(r: int, degree: int) -> list:
    """All exponent vectors of length ``r`` and total degree ``degree``, lexicographically descending."""
    if r == 0:
        return [()] if degree == 0 else []
    out = []
    for a in range(degree, -1, -1):
        out.extend((a,) + rest for rest in multi_indices(r - 1, degree - a))
    return out


def format_multi_index(alpha: tuple) -> str:
    parts = [f"e{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(alpha) if a]
    return "*".join(parts) if parts else "1"


_GEN_RE = re.compile(r"^e(\d+)(?:\^(\d+))?$")


def parse_multi_index(text: str, r: int) -> tuple:
    """Inverse of :func:`format_multi_index`; the factors must already be in frame order."""
    text = text.strip()
    alpha = [0] * r
    if text == "1":
        return tuple(alpha)
    last = -1
    for part in text.split("*"):
        m = _GEN_RE.match(part.strip())
        if not m:
            raise ValueError(f"bad PBW monomial {text!r}")
        i = int(m.group(1)) - 1
        if not 0 <= i < r or i <= last:
            raise ValueError(f"PBW monomial {text!r} is not in frame order")
        last = i
        alpha[i] = int(m.group(2) or 1)
    return tuple(alpha)


class Envelope:
    """``U(L, R)`` for a presentation, with a lock-protected product cache."""

    def __init__(self, pres: Presentation):
        self.pres = pres
        self.r = pres.rank
        self._cache: dict = {}
        self._lock = threading.Lock()

    # -- constructors ---------------------------------------------------
    def zero(self) -> "UElement":
        return UElement(self, {})

    def one(self) -> "UElement":
        return self.scalar(1)

    def scalar(self, f) -> "UElement":
        return UElement(self, {(0,) * self.r: Poly.coerce(f)})

    def gen(self, i: int) -> "UElement":
        """The frame generator ``e_i`` (0-based)."""
        return self.mono(tuple(int(k == i) for k in range(self.r)))

    def mono(self, alpha: Sequence[int], coeff=1) -> "UElement":
        return UElement(self, {tuple(alpha): Poly.coerce(coeff)})

    def section(self, X: Sequence) -> "UElement":
        """A section ``Σ X_i e_i`` of ``L`` viewed in ``U``."""
        out: dict = {}
        for i, c in enumerate(X):
            _add(out, tuple(int(k == i) for k in range(self.r)), Poly.coerce(c))
        return UElement(self, out)

    # -- the one primitive ------------------------------------------------
    def gen_times_mono(self, i: int, alpha: tuple) -> dict:
        """Normal form of ``e_i · e^α``."""
        key = (i, alpha)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        j = next((k for k, a in enumerate(alpha) if a), None)
        if j is None or i <= j:
            res = {alpha[:i] + (alpha[i] + 1,) + alpha[i + 1 :]: Poly.const(1)}
        else:
            # e_i e_j e^{α'} = e_j (e_i e^{α'}) + Σ_k c_ij^k e_k e^{α'}
            rest = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
            res = dict(self.gen_times(j, self.gen_times_mono(i, rest)))
            for k in range(self.r):
                c = self.pres.c(i, j, k)
                if c:
                    for b, f in self.gen_times_mono(k, rest).items():
                        _add(res, b, c * f)
        with self._lock:
            self._cache.setdefault(key, res)
        return res

    def gen_times(self, i: int, terms: dict) -> dict:
        """``e_i · Σ f_β e^β = Σ (f_β e_i e^β + ρ_i(f_β) e^β)``."""
        out: dict = {}
        for beta, f in terms.items():
            for g, c in self.gen_times_mono(i, beta).items():
                _add(out, g, f * c)
            _add(out, beta, self.pres.anchor_apply(i, f))
        return out

    def mono_times(self, alpha: tuple, terms: dict) -> dict:
        """``e^α · b``: apply the generators of ``e^α`` from the right end inwards."""
        for i in range(self.r - 1, -1, -1):
            for _ in range(alpha[i]):
                terms = self.gen_times(i, terms)
        return terms

    def mul(self, a: "UElement", b: "UElement") -> "UElement":
        out: dict = {}
        for alpha, f in a.terms.items():
            for g, c in self.mono_times(alpha, b.terms).items():
                _add(out, g, f * c)
        return UElement(self, out)

    def __eq__(self, other):
        return isinstance(other, Envelope) and other.pres == self.pres

    def __hash__(self):
        return hash(("U", self.pres.variables, self.pres.rank))


class UElement:
    """``Σ_α f_α e^α`` in PBW normal form."""

    __slots__ = ("env", "terms")

    def __init__(self, env: Envelope, terms: dict):
        self.env = env
        self.terms = {k: v for k, v in terms.items() if v}

    @property
    def filtration(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def __add__(self, other: "UElement") -> "UElement":
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add(out, k, v)
        return UElement(self.env, out)

    def __neg__(self):
        return UElement(self.env, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "UElement":
        """Left multiplication by a base function (or a number)."""
        c = Poly.coerce(c)
        return UElement(self.env, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, UElement):
            return self.env.mul(self, other)
        return self.env.mul(self, self.env.scalar(other))

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        return isinstance(other, UElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def graded_part(self, k: int) -> dict:
        """Coefficients of the filtration-``k`` monomials (the symbol when ``k`` is the top degree)."""
        return {a: f for a, f in self.terms.items() if sum(a) == k}

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for alpha in sorted(self.terms, key=lambda a: (sum(a), tuple(-x for x in a))):
            parts.append(f"({self.terms[alpha]})*{format_multi_index(alpha)}")
        return " + ".join(parts)

    __repr__ = __str__


def normal_order(word: Iterable, env: Envelope) -> UElement:
    """Normal form of a word whose letters are generator indices (``int``) or base polynomials."""
    out = env.one()
    for letter in reversed(list(word)):
        if isinstance(letter, int):
            out = UElement(env, env.gen_times(letter, out.terms))
        else:
            out = out.scale(letter)
    return out


def u_mul(a: UElement, b: UElement) -> UElement:
    return a.env.mul(a, b)


def coproduct(a: UElement) -> dict:
    """``Δ(f e^α) = f Σ_{β≤α} binom(α, β) e^β ⊗ e^{α−β}`` as ``{(β, γ): coefficient}``."""
    out: dict = {}
    for alpha, f in a.terms.items():
        for beta in _below(alpha):
            gamma = tuple(x - y for x, y in zip(alpha, beta))
            _add(out, (beta, gamma), f.scale(_binom(alpha, beta)))
    return out


def _below(alpha: tuple):
    if not alpha:
        yield ()
        return
    for b in range(alpha[0] + 1):
        for rest in _below(alpha[1:]):
            yield (b,) + rest


def _binom(alpha: tuple, beta: tuple) -> int:
    return math.prod(math.comb(a, b) for a, b in zip(alpha, beta))


class JetTable:
    """A jet ``φ ∈ Hom_R(U, R)`` known on PBW monomials of degree ``≤ order``."""

    __slots__ = ("env", "order", "values")

    def __init__(self, env: Envelope, order: int, values: dict | None = None):
        self.env = env
        self.order = order
        self.values = {
            a: Poly.coerce(v) for a, v in (values or {}).items() if sum(a) <= order and Poly.coerce(v)
        }

    # -- construction ---------------------------------------------------
    @classmethod
    def counit(cls, env: Envelope, order: int) -> "JetTable":
        return cls(env, order, {(0,) * env.r: Poly.const(1)})

    @classmethod
    def from_function(cls, env: Envelope, order: int, fn) -> "JetTable":
        """Tabulate ``fn(alpha)`` on all PBW monomials up to ``order``."""
        vals = {}
        for d in range(order + 1):
            for a in multi_indices(env.r, d):
                vals[a] = fn(a)
        return cls(env, order, vals)

    # -- evaluation -------------------------------------------------------
    def __call__(self, D: UElement) -> Poly:
        if D.filtration > self.order:
            raise TruncationError(f"evaluating a jet on filtration {D.filtration} needs order N >= {D.filtration}")
        out = Poly()
        for alpha, f in D.terms.items():
            v = self.values.get(alpha)
            if v:
                out = out + f * v
        return out

    def value(self, alpha: tuple) -> Poly:
        if sum(alpha) > self.order:
            raise TruncationError(f"jet value at degree {sum(alpha)} needs order N >= {sum(alpha)}")
        return self.values.get(tuple(alpha), Poly())

    # -- linear structure ---------------------------------------------------
    def _same(self, other: "JetTable") -> int:
        return min(self.order, other.order)

    def __add__(self, other: "JetTable") -> "JetTable":
        n = self._same(other)
        vals = dict(self.values)
        for k, v in other.values.items():
            vals[k] = vals.get(k, Poly()) + v
        return JetTable(self.env, n, vals)

    def __neg__(self):
        return JetTable(self.env, self.order, {k: -v for k, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def truncate(self, order: int) -> "JetTable":
        if order > self.order:
            raise TruncationError(f"cannot raise a jet of order {self.order} to order {order}")
        return JetTable(self.env, order, self.values)

    def __eq__(self, other):
        return (
            isinstance(other, JetTable)
            and self.order == other.order
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.order, frozenset(self.values.items())))

    # -- algebra structure ----------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, JetTable):
            return jet_product(self, other)
        return self.alpha1(other)

    def alpha1(self, f) -> "JetTable":
        """First module structure: ``(α₁(f)φ)(D) = f·φ(D)``."""
        f = Poly.coerce(f)
        return JetTable(self.env, self.order, {k: f * v for k, v in self.values.items()})

    def alpha2(self, f) -> "JetTable":
        """Second module structure: ``(α₂(f)φ)(D) = φ(D f)``."""
        f = self.env.scalar(f)
        return JetTable.from_function(
            self.env, self.order, lambda a: self(self.env.mono(a) * f)
        )

    def nabla1(self, i: int) -> "JetTable":
        """``∇^{(1)}_i φ(D) = φ(e_i D) − ρ_i(φ(D))``; loses one order."""
        self._need(1)
        env = self.env
        return JetTable.from_function(
            env,
            self.order - 1,
            lambda a: self(UElement(env, env.gen_times_mono(i, a))) - env.pres.anchor_apply(i, self.value(a)),
        )

    def nabla_flat(self, i: int) -> "JetTable":
        """The Leibniz-compatible flat L-action ``∇'_i φ(D) = ρ_i(φ(D)) − φ(e_i D) = −∇^{(1)}_i φ``."""
        return -self.nabla1(i)

    def nabla2(self, i: int) -> "JetTable":
        """``∇^{(2)}_i φ(D) = φ(D e_i)``; loses one order."""
        self._need(1)
        env = self.env
        g = env.gen(i)
        return JetTable.from_function(env, self.order - 1, lambda a: self(env.mono(a) * g))

    def _need(self, k: int) -> None:
        if self.order < k:
            raise TruncationError(f"operation needs jet order N >= {k}, have {self.order}")

    # -- serialization --------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"order = {self.order}"]
        for d in range(self.order + 1):
            for a in multi_indices(self.env.r, d):
                v = self.values.get(a)
                if v:
                    lines.append(f"{format_multi_index(a)} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, env: Envelope, text: str) -> "JetTable":
        order = None
        vals = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            key = key.strip()
            if key == "order":
                order = int(val)
            else:
                vals[parse_multi_index(key, env.r)] = parse_poly(val)
        if order is None:
            raise ValueError("jet text lacks an order line")
        return cls(env, order, vals)


def jet_product(phi: JetTable, psi: JetTable) -> JetTable:
    """``(φψ)(D) = φ(D_(1)) ψ(D_(2))``."""
    n = min(phi.order, psi.order)
    vals = {}
    for d in range(n + 1):
        for alpha in multi_indices(phi.env.r, d):
            s = Poly()
            for beta in _below(alpha):
                a = phi.values.get(beta)
                if not a:
                    continue
                b = psi.values.get(tuple(x - y for x, y in zip(alpha, beta)))
                if b:
                    s = s + (a * b).scale(_binom(alpha, beta))
            if s:
                vals[alpha] = s
    return JetTable(phi.env, n, vals)
