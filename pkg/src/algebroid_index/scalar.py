"""Exact scalars, sparse multivariate polynomials, Laurent series in ``u``,
and exact integration over simplices.

Polynomials are stored sparsely: a monomial is a tuple of ``(name, exponent)``
pairs sorted by :func:`var_key`, and a polynomial is a mapping from monomials
to :class:`fractions.Fraction` coefficients.  The alphabet of a polynomial is
the set of variables that actually occur, ordered by role (base ``x``-type
variables, then ``q``, ``p``, ``t`` and finally ``u``).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

Q = Fraction

__all__ = [
    "Q",
    "AlphabetError",
    "DegreeError",
    "Poly",
    "LaurentU",
    "parse_poly",
    "var_key",
    "var_role",
    "integrate_ordered_simplex",
    "integrate_barycentric_simplex",
]


class AlphabetError(KeyError):
    """Raised when a variable name is not usable in the requested context."""


class DegreeError(ValueError):
    """Raised when a form of the wrong degree is handed to an integrator."""


_ROLE_ORDER = {"base": 0, "q": 1, "p": 2, "t": 3, "u": 4}
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_SPLIT_RE = re.compile(r"^(.*?)(\d*)$")


@lru_cache(maxsize=None)
def var_role(name: str) -> str:
    """Role of a variable, read off from its name."""
    if re.fullmatch(r"q\d*", name):
        return "q"
    if re.fullmatch(r"p\d*", name):
        return "p"
    if re.fullmatch(r"t\d*", name):
        return "t"
    if name == "u":
        return "u"
    return "base"


@lru_cache(maxsize=None)
def var_key(name: str):
    """Sort key: role first, then alphabetic stem, then numeric suffix."""
    stem, digits = _SPLIT_RE.match(name).groups()
    return (_ROLE_ORDER[var_role(name)], stem, int(digits) if digits else -1, name)


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda ve: var_key(ve[0])))


def _as_q(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact scalar: {c!r}")


class Poly:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("_t", "_h")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        t = {}
        if terms:
            for m, c in terms.items():
                if c:
                    t[m] = c if isinstance(c, Fraction) else _as_q(c)
        self._t = t
        self._h = None

    # -- constructors -------------------------------------------------
    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        p = object.__new__(cls)
        p._t = terms
        p._h = None
        return p

    @classmethod
    def const(cls, c) -> "Poly":
        c = _as_q(c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def var(cls, name: str, exp: int = 1) -> "Poly":
        if not _NAME_RE.match(name):
            raise AlphabetError(name)
        if exp == 0:
            return cls.const(1)
        return cls._raw({((name, exp),): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Mapping[str, int], coeff=1) -> "Poly":
        mono = tuple(sorted(((v, e) for v, e in exps.items() if e), key=lambda ve: var_key(ve[0])))
        c = _as_q(coeff)
        return cls._raw({mono: c} if c else {})

    @classmethod
    def coerce(cls, x) -> "Poly":
        if isinstance(x, Poly):
            return x
        return cls.const(x)

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> dict:
        return self._t

    def items(self):
        return self._t.items()

    def __bool__(self):
        return bool(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def is_const(self) -> bool:
        return not self._t or (len(self._t) == 1 and () in self._t)

    def const_term(self) -> Fraction:
        return self._t.get((), Fraction(0))

    def variables(self) -> tuple:
        names = {v for m in self._t for v, _ in m}
        return tuple(sorted(names, key=var_key))

    @property
    def alphabet(self) -> tuple:
        return self.variables()

    def exponent_vectors(self, alphabet: Iterable[str] | None = None) -> dict:
        """Dense view: exponent vectors over ``alphabet`` mapped to coefficients."""
        alpha = tuple(alphabet) if alphabet is not None else self.variables()
        pos = {v: i for i, v in enumerate(alpha)}
        out = {}
        for m, c in self._t.items():
            vec = [0] * len(alpha)
            for v, e in m:
                if v not in pos:
                    raise AlphabetError(v)
                vec[pos[v]] = e
            out[tuple(vec)] = c
        return out

    def degree(self, names: Iterable[str] | None = None) -> int:
        """Total degree, optionally counting only the given variables; -1 for zero."""
        if not self._t:
            return -1
        if names is None:
            return max(sum(e for _, e in m) for m in self._t)
        s = set(names)
        return max(sum(e for v, e in m if v in s) for m in self._t)

    def role_degree(self, role: str) -> int:
        if not self._t:
            return -1
        return max(sum(e for v, e in m if var_role(v) == role) for m in self._t)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = Poly.coerce(other)
        if not other._t:
            return self
        if not self._t:
            return other
        t = dict(self._t)
        for m, c in other._t.items():
            s = t.get(m)
            if s is None:
                t[m] = c
            else:
                s += c
                if s:
                    t[m] = s
                else:
                    del t[m]
        return Poly._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self._t.items()})

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def scale(self, c) -> "Poly":
        c = _as_q(c)
        if not c:
            return Poly()
        if c == 1:
            return self
        return Poly._raw({m: v * c for m, v in self._t.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        if not self._t or not other._t:
            return Poly()
        t: dict = {}
        for m1, c1 in self._t.items():
            for m2, c2 in other._t.items():
                m = _mono_mul(m1, m2)
                s = t.get(m, 0) + c1 * c2
                if s:
                    t[m] = s
                else:
                    t.pop(m, None)
        return Poly._raw(t)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        c = _as_q(other)
        return self.scale(1 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._t == other._t
        if isinstance(other, (int, Fraction)):
            return self._t == Poly.const(other)._t
        return NotImplemented

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._t.items()))
        return self._h

    # -- calculus and substitution -----------------------------------
    def diff(self, name: str, times: int = 1) -> "Poly":
        t: dict = {}
        for m, c in self._t.items():
            d = dict(m)
            e = d.get(name, 0)
            if e < times:
                continue
            coeff = c * math.perm(e, times)
            if e == times:
                del d[name]
            else:
                d[name] = e - times
            nm = tuple(sorted(d.items(), key=lambda ve: var_key(ve[0])))
            t[nm] = t.get(nm, 0) + coeff
        return Poly({m: c for m, c in t.items() if c})

    def subs(self, mapping: Mapping[str, "Poly"]) -> "Poly":
        """Simultaneous substitution of variables by polynomials."""
        mapping = {k: Poly.coerce(v) for k, v in mapping.items()}
        for k in mapping:
            if not _NAME_RE.match(k):
                raise AlphabetError(k)
        out = Poly()
        cache: dict = {}
        for m, c in self._t.items():
            rest = []
            term = Poly.const(c)
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = mapping[v] ** e
                    term = term * cache[key]
                else:
                    rest.append((v, e))
            if rest:
                term = term * Poly._raw({tuple(rest): Fraction(1)})
            out = out + term
        return out

    def evaluate_at_zero(self, roles: Iterable[str] | None = None, names: Iterable[str] | None = None) -> "Poly":
        """Set every variable of the given roles (or names) to zero; all variables by default."""
        if roles is None and names is None:
            return Poly.const(self.const_term())
        rs = set(roles or ())
        ns = set(names or ())
        kill = lambda v: v in ns or var_role(v) in rs  # noqa: E731
        return Poly._raw({m: c for m, c in self._t.items() if not any(kill(v) for v, _ in m)})

    def coefficient(self, exps: Mapping[str, int], over: Iterable[str]) -> "Poly":
        """Coefficient of the monomial ``exps`` in the variables ``over``; other variables stay."""
        over = set(over)
        want = {v: e for v, e in exps.items() if e}
        t: dict = {}
        for m, c in self._t.items():
            sel = {v: e for v, e in m if v in over}
            if sel != want:
                continue
            rest = tuple((v, e) for v, e in m if v not in over)
            t[rest] = t.get(rest, 0) + c
        return Poly({m: c for m, c in t.items() if c})

    def truncate(self, max_degree: int, names: Iterable[str] | None = None) -> "Poly":
        """Drop monomials whose degree in ``names`` (all variables by default) exceeds ``max_degree``."""
        s = set(names) if names is not None else None
        return Poly._raw(
            {
                m: c
                for m, c in self._t.items()
                if sum(e for v, e in m if s is None or v in s) <= max_degree
            }
        )

    def map_coeffs(self, f) -> "Poly":
        return Poly({m: f(c) for m, c in self._t.items()})

    # -- printing -----------------------------------------------------
    def sorted_terms(self):
        """Terms in graded-lex order: higher total degree first, then lex on the role-sorted alphabet."""
        alpha = self.variables()

        def key(item):
            d = dict(item[0])
            vec = [d.get(a, 0) for a in alpha]
            return (-sum(vec), [-e for e in vec])

        return sorted(self._t.items(), key=key)

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        s0, b0 = parts[0]
        out = ("-" if s0 == "-" else "") + b0
        for s, b in parts[1:]:
            out += f" {s} {b}"
        return out

    def __repr__(self):
        return f"Poly({str(self)!r})"


# ---------------------------------------------------------------------------
# Text grammar
# ---------------------------------------------------------------------------
_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


class _Parser:
    """Recursive-descent parser for ``expr := term (('+'|'-') term)*`` etc.

    ``name`` and ``const`` build atoms, so the same grammar serves any ring whose
    elements support ``+``, ``-``, ``*`` and ``scale``.
    """

    def __init__(self, text: str, name=None, const=None):
        self.make_name = name or Poly.var
        self.make_const = const or Poly.const
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                raise SyntaxError(f"cannot tokenize at {text[pos:]!r}")
            num, name, op = m.groups()
            if num is not None:
                self.toks.append(("num", int(num)))
            elif name is not None:
                self.toks.append(("name", name))
            elif op is not None:
                if op not in "+-*^/()":
                    raise SyntaxError(f"unexpected character {op!r}")
                self.toks.append(("op", op))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, val=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (val is not None and tok[1] != val):
            raise SyntaxError(f"expected {val or kind}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise SyntaxError("empty expression")
        p = self.expr()
        if self.i != len(self.toks):
            raise SyntaxError(f"trailing input at token {self.peek()[1]!r}")
        return p

    def expr(self) -> Poly:
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        acc = self.term().scale(sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Poly:
        acc = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> Poly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            k = self.take("num")[1]
            acc = self.make_const(1)
            for _ in range(k):
                acc = acc * base
            return acc
        return base

    def atom(self) -> Poly:
        kind, val = self.peek()
        if kind == "num":
            self.take()
            if self.peek() == ("op", "/"):
                self.take()
                den = self.take("num")[1]
                if den == 0:
                    raise ZeroDivisionError("zero denominator in literal")
                return self.make_const(Fraction(val, den))
            return self.make_const(val)
        if kind == "name":
            self.take()
            return self.make_name(val)
        if (kind, val) == ("op", "("):
            self.take()
            inner = self.expr()
            self.take("op", ")")
            return inner
        if (kind, val) == ("op", "-"):
            self.take()
            return -self.factor()
        raise SyntaxError(f"unexpected token {val!r}")


def parse_poly(text: str) -> Poly:
    """Parse the polynomial text grammar (integers, ``a/b``, names, ``+ - * ^``, parentheses)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Laurent polynomials in u
# ---------------------------------------------------------------------------
class LaurentU:
    """Finite sum ``Σ c_k u^k`` with ``k ∈ ℤ`` and polynomial (or rational) coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            v = Poly.coerce(v)
            if v:
                c[int(k)] = v
        self._c = c

    @classmethod
    def scalar(cls, v, k: int = 0) -> "LaurentU":
        return cls({k: v})

    @property
    def coeffs(self) -> dict:
        return self._c

    def __getitem__(self, k: int) -> Poly:
        return self._c.get(k, Poly())

    def exponents(self):
        return sorted(self._c)

    def __bool__(self):
        return bool(self._c)

    def __add__(self, other):
        other = other if isinstance(other, LaurentU) else LaurentU.scalar(other)
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, Poly()) + v
        return LaurentU(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentU({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        other = other if isinstance(other, LaurentU) else LaurentU.scalar(other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentU):
            return LaurentU({k: v * other for k, v in self._c.items()})
        out: dict = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                out[k1 + k2] = out.get(k1 + k2, Poly()) + v1 * v2
        return LaurentU(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentU":
        """Multiply by ``u^k``."""
        return LaurentU({e + k: v for e, v in self._c.items()})

    def __eq__(self, other):
        if not isinstance(other, LaurentU):
            other = LaurentU.scalar(other)
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for k in sorted(self._c, reverse=True):
            v = str(self._c[k])
            parts.append(f"({v})" + ("" if k == 0 else f"*u^{k}" if k != 1 else "*u"))
        return " + ".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------
def _antiderivative(f: Poly, name: str) -> Poly:
    t = {}
    for m, c in f.items():
        d = dict(m)
        e = d.get(name, 0) + 1
        d[name] = e
        nm = tuple(sorted(d.items(), key=lambda ve: var_key(ve[0])))
        t[nm] = c / e
    return Poly(t)


def integrate_ordered_simplex(f: Poly, k: int, tvars: Iterable[str] | None = None) -> Poly:
    """Exact ``∫_0^1 ∫_0^{t_k} … ∫_0^{t_2} f dt_1 … dt_k``; the t-variables are eliminated.

    ``tvars`` defaults to ``t1 … tk``; other variables are treated as constants.
    """
    if k < 0:
        raise ValueError("simplex dimension must be non-negative")
    names = list(tvars) if tvars is not None else [f"t{i}" for i in range(1, k + 1)]
    if len(names) != k:
        raise ValueError("need exactly k integration variables")
    g = Poly.coerce(f)
    for i, name in enumerate(names):
        upper = Poly.var(names[i + 1]) if i + 1 < k else Poly.const(1)
        prim = _antiderivative(g, name)
        g = prim.subs({name: upper}) - prim.subs({name: 0})
    return g


def integrate_barycentric_simplex(f: Poly, n: int, form_degree: int | None = None, tvars: Iterable[str] | None = None) -> Poly:
    """Integrate the top form ``f dt_1 ∧ … ∧ dt_n`` over the standard simplex ``Δ^n``.

    The simplex is ``{t_i ≥ 0, Σ_{i≥1} t_i ≤ 1}`` with ``t_0 = 1 − Σ t_i``; occurrences of
    ``t0`` are eliminated first.  Monomials integrate by the Dirichlet formula
    ``a_1!…a_n!/(a_1+…+a_n+n)!``.
    """
    if form_degree is not None and form_degree != n:
        raise DegreeError(f"form of degree {form_degree} cannot be integrated over a {n}-simplex")
    names = list(tvars) if tvars is not None else [f"t{i}" for i in range(1, n + 1)]
    g = Poly.coerce(f)
    if "t0" in g.variables() and "t0" not in names:
        g = g.subs({"t0": Poly.const(1) - sum((Poly.var(v) for v in names), Poly())})
    pos = set(names)
    out: dict = {}
    for m, c in g.items():
        exps = [dict(m).get(v, 0) for v in names]
        w = Fraction(math.prod(math.factorial(a) for a in exps), math.factorial(sum(exps) + n))
        rest = tuple((v, e) for v, e in m if v not in pos)
        out[rest] = out.get(rest, 0) + c * w
    return Poly(out)
