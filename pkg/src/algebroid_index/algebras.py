"""Algebras that Hochschild chains can live over.

Each algebra exposes a basis: :meth:`Algebra.split` turns an element into a
``{key: coefficient}`` mapping, where the coefficients are polynomials in
*spectator* variables (variables the algebra treats as central scalars), and
:meth:`Algebra.mul_keys` multiplies two basis keys.  Chains only ever touch
keys, which keeps them hashable and cheap to compare.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

from .scalar import Poly, var_key
from .weyl import DEFAULT_MOYAL, MOYAL_SCALE, MatrixWeyl, _star_fiber, fiber_index


def _sort_mono(d: dict) -> tuple:
    return tuple(sorted(((v, e) for v, e in d.items() if e), key=lambda ve: var_key(ve[0])))


def _split_mono(mono: tuple, is_key_var) -> tuple:
    k, s = [], []
    for v, e in mono:
        (k if is_key_var(v) else s).append((v, e))
    return tuple(k), tuple(s)


class Algebra:
    """Interface: keys, unit, multiplication on keys, grading on keys."""

    name = "algebra"

    @property
    def unit_key(self):
        raise NotImplementedError

    def split(self, elem) -> dict:
        raise NotImplementedError

    def assemble(self, parts: dict):
        raise NotImplementedError

    def mul_keys(self, k1, k2) -> dict:
        raise NotImplementedError

    def key_degree(self, key) -> int:
        return 0

    def is_unit_key(self, key) -> bool:
        return key == self.unit_key

    # generic helpers
    def mul(self, a, b):
        out: dict = {}
        for k1, c1 in self.split(a).items():
            for k2, c2 in self.split(b).items():
                for k, c in self.mul_keys(k1, k2).items():
                    out[k] = out.get(k, Poly()) + c1 * c2 * c
        return self.assemble(out)

    def key_str(self, key) -> str:
        return str(self.assemble({key: Poly.const(1)}))


class PolyAlgebra(Algebra):
    """Commutative polynomial ring over the named generators; other variables are scalars."""

    def __init__(self, names):
        self.names = tuple(sorted(names, key=var_key))
        self._set = frozenset(self.names)
        self.name = "poly[" + ",".join(self.names) + "]"

    @property
    def unit_key(self):
        return ()

    def split(self, elem) -> dict:
        out: dict = {}
        for m, c in Poly.coerce(elem).items():
            k, s = _split_mono(m, self._set.__contains__)
            out[k] = out.get(k, Poly()) + Poly({s: c})
        return {k: v for k, v in out.items() if v}

    def assemble(self, parts: dict):
        out = Poly()
        for k, c in parts.items():
            out = out + Poly({k: 1}) * c
        return out

    def mul_keys(self, k1, k2) -> dict:
        d = dict(k1)
        for v, e in k2:
            d[v] = d.get(v, 0) + e
        return {_sort_mono(d): Poly.const(1)}

    def __eq__(self, other):
        return isinstance(other, PolyAlgebra) and other.names == self.names

    def __hash__(self):
        return hash(("poly", self.names))


class WeylAlgebra(Algebra):
    """W_n with the Moyal product; non-fiber variables are central scalars."""

    def __init__(self, n: int, convention: str = DEFAULT_MOYAL):
        self.n = n
        self.convention = convention
        self._c = MOYAL_SCALE[convention]
        self.name = f"weyl[{n},{convention}]"

    @property
    def unit_key(self):
        return ()

    def split(self, elem) -> dict:
        out: dict = {}
        for m, c in Poly.coerce(elem).items():
            k, s = _split_mono(m, lambda v: fiber_index(v) is not None)
            out[k] = out.get(k, Poly()) + Poly({s: c})
        return {k: v for k, v in out.items() if v}

    def assemble(self, parts: dict):
        out = Poly()
        for k, c in parts.items():
            out = out + Poly({k: 1}) * c
        return out

    def mul_keys(self, k1, k2) -> dict:
        return {m: Poly.const(c) for m, c in _star_fiber(k1, k2, self._c)}

    def __eq__(self, other):
        return isinstance(other, WeylAlgebra) and (other.n, other.convention) == (self.n, self.convention)

    def __hash__(self):
        return hash(("weyl", self.n, self.convention))


class MatrixAlgebra(Algebra):
    """M_r(A) with basis {I⊗k} ∪ {E_ij⊗k : (i,j) ≠ (0,0)} so that the unit is a single key."""

    def __init__(self, base: Algebra, r: int):
        self.base = base
        self.r = r
        self.name = f"mat[{r}]({base.name})"

    @property
    def unit_key(self):
        return ("I", self.base.unit_key)

    def _to_key_dict(self, entries) -> dict:
        """Entry matrix of dicts {basekey: coeff} → key dict in the adapted basis."""
        out: dict = {}
        r = self.r
        # coefficient of I is the (0,0) entry; subtract it from the other diagonal entries
        e00 = entries[0][0]
        for k, c in e00.items():
            out[("I", k)] = out.get(("I", k), Poly()) + c
        for i in range(r):
            for j in range(r):
                if (i, j) == (0, 0):
                    continue
                d = dict(entries[i][j])
                if i == j:
                    for k, c in e00.items():
                        d[k] = d.get(k, Poly()) - c
                for k, c in d.items():
                    if c:
                        out[(i, j, k)] = out.get((i, j, k), Poly()) + c
        return {k: v for k, v in out.items() if v}

    def _entries(self, key) -> list:
        r = self.r
        m = [[{} for _ in range(r)] for _ in range(r)]
        if key[0] == "I":
            for i in range(r):
                m[i][i] = {key[1]: Poly.const(1)}
        else:
            i, j, k = key
            m[i][j] = {k: Poly.const(1)}
        return m

    def split(self, elem) -> dict:
        if not isinstance(elem, MatrixWeyl):
            raise TypeError("matrix algebra expects a MatrixWeyl element")
        ents = [[self.base.split(elem[i, j]) for j in range(self.r)] for i in range(self.r)]
        return self._to_key_dict(ents)

    def assemble(self, parts: dict):
        r = self.r
        acc = [[{} for _ in range(r)] for _ in range(r)]
        for key, c in parts.items():
            ents = self._entries(key)
            for i in range(r):
                for j in range(r):
                    for k, v in ents[i][j].items():
                        acc[i][j][k] = acc[i][j].get(k, Poly()) + v * c
        return MatrixWeyl([[self.base.assemble(acc[i][j]) for j in range(r)] for i in range(r)])

    @lru_cache(maxsize=100_000)
    def mul_keys(self, k1, k2) -> dict:
        r = self.r
        a, b = self._entries(k1), self._entries(k2)
        prod = [[{} for _ in range(r)] for _ in range(r)]
        for i in range(r):
            for l in range(r):
                if not a[i][l]:
                    continue
                for j in range(r):
                    if not b[l][j]:
                        continue
                    for ka, ca in a[i][l].items():
                        for kb, cb in b[l][j].items():
                            for k, c in self.base.mul_keys(ka, kb).items():
                                prod[i][j][k] = prod[i][j].get(k, Poly()) + ca * cb * c
        return self._to_key_dict(prod)

    def trace_key(self, key) -> dict:
        """Trace of a basis element, as a dict over base keys."""
        if key[0] == "I":
            return {key[1]: Poly.const(self.r)}
        i, j, k = key
        return {k: Poly.const(1)} if i == j else {}

    def __eq__(self, other):
        return isinstance(other, MatrixAlgebra) and (other.base, other.r) == (self.base, self.r)

    def __hash__(self):
        return hash(("mat", self.base, self.r))


class FormAlgebra(Algebra):
    """Graded algebra A ⊗ Λ(ε^1..ε^d): base keys paired with increasing index tuples.

    Elements are dicts ``{(basekey, idx): coeff}`` or :class:`FormElement` values.
    The base algebra is ungraded, so ``(a⊗ω)(b⊗η) = ab ⊗ ω∧η``.
    """

    def __init__(self, base: Algebra, dim: int):
        self.base = base
        self.dim = dim
        self.name = f"forms[{dim}]({base.name})"

    @property
    def unit_key(self):
        return (self.base.unit_key, ())

    def key_degree(self, key) -> int:
        return len(key[1])

    def split(self, elem) -> dict:
        if isinstance(elem, dict):
            out: dict = {}
            for idx, val in elem.items():
                for k, c in self.base.split(val).items():
                    out[(k, tuple(idx))] = out.get((k, tuple(idx)), Poly()) + c
            return {k: v for k, v in out.items() if v}
        return {(k, ()): c for k, c in self.base.split(elem).items()}

    def assemble(self, parts: dict) -> dict:
        acc: dict = {}
        for (k, idx), c in parts.items():
            acc.setdefault(idx, {})
            acc[idx][k] = acc[idx].get(k, Poly()) + c
        out = {idx: self.base.assemble(d) for idx, d in acc.items()}
        return {idx: v for idx, v in out.items() if not _is_zero(v)}

    def mul_keys(self, k1, k2) -> dict:
        sgn, idx = wedge_indices(k1[1], k2[1])
        if not sgn:
            return {}
        return {(k, idx): c.scale(sgn) for k, c in self.base.mul_keys(k1[0], k2[0]).items()}

    def __eq__(self, other):
        return isinstance(other, FormAlgebra) and (other.base, other.dim) == (self.base, self.dim)

    def __hash__(self):
        return hash(("forms", self.base, self.dim))


def _is_zero(v) -> bool:
    if isinstance(v, MatrixWeyl):
        return v.is_zero()
    return not v


@lru_cache(maxsize=None)
def wedge_indices(a: tuple, b: tuple):
    """Sign and sorted index tuple of ``ε^a ∧ ε^b`` (sign 0 when an index repeats)."""
    if set(a) & set(b):
        return 0, ()
    seq = list(a) + list(b)
    inv = sum(1 for i, j in combinations(range(len(seq)), 2) if seq[i] > seq[j])
    return (-1) ** inv, tuple(sorted(seq))
