"""Hochschild and cyclic chains: b, B, insertion, Lie action, shuffle product.

A :class:`Chain` is a finite sum of elementary tensors over an
:class:`~algebroid_index.algebras.Algebra`.  Internally each term is keyed by
``(u_exponent, key_0, …, key_k)`` with a polynomial coefficient in the
algebra's spectator variables.  Constants in slots ``1..k`` are dropped on
construction, so every chain lives in the reduced complex.

Signs follow the graded conventions: for a graded algebra the last face of
``b`` and the cyclic rotations in ``B`` pick up Koszul signs from the key
degrees, and the shuffle product carries ``sgn(σ)`` times the Koszul sign of
the permutation.
"""

from __future__ import annotations

from enum import Enum
from itertools import combinations
from typing import Sequence

from .algebras import Algebra
from .scalar import Poly


class UModuleKind(str, Enum):
    HOCHSCHILD = "hochschild"
    CYCLIC = "cyclic"
    PERIODIC = "periodic"
    NEGATIVE = "negative"

    def admits(self, k: int) -> bool:
        """Whether ``u^k`` survives in the coefficient module of this kind (homology side)."""
        if self is UModuleKind.HOCHSCHILD:
            return k == 0
        if self is UModuleKind.CYCLIC:
            return k <= 0
        if self is UModuleKind.NEGATIVE:
            return k >= 0
        return True


class AlgebraMismatch(TypeError):
    pass


def _koszul(degs: Sequence[int], perm: Sequence[int]) -> int:
    """Koszul sign of rearranging items of the given degrees into order ``perm``."""
    s = 0
    for i, j in combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            s += degs[perm[i]] * degs[perm[j]]
    return -1 if s % 2 else 1


def _perm_sign(perm: Sequence[int]) -> int:
    inv = sum(1 for i, j in combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


class Chain:
    """Finite formal sum of elementary tensors with u-exponents."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Algebra, terms: dict | None = None):
        self.alg = alg
        clean: dict = {}
        unit = alg.unit_key
        for key, c in (terms or {}).items():
            if not c:
                continue
            if any(k == unit for k in key[2:]):
                continue
            clean[key] = clean.get(key, Poly()) + c
        self.terms = {k: v for k, v in clean.items() if v}

    # -- construction -------------------------------------------------
    @classmethod
    def from_tensor(cls, alg: Algebra, entries: Sequence, coeff=1, uexp: int = 0) -> "Chain":
        """Elementary tensor ``coeff · u^uexp · e_0 ⊗ … ⊗ e_k``."""
        acc = {(uexp,): Poly.coerce(coeff)}
        for e in entries:
            parts = alg.split(e)
            nxt: dict = {}
            for key, c in acc.items():
                for k, v in parts.items():
                    nk = key + (k,)
                    nxt[nk] = nxt.get(nk, Poly()) + c * v
            acc = nxt
        return cls(alg, acc)

    @classmethod
    def zero(cls, alg: Algebra) -> "Chain":
        return cls(alg, {})

    def _check(self, other: "Chain"):
        if self.alg != other.alg:
            raise AlgebraMismatch(f"{self.alg.name} vs {other.alg.name}")

    # -- vector space structure ---------------------------------------
    def __add__(self, other: "Chain") -> "Chain":
        self._check(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, Poly()) + v
        return Chain(self.alg, t)

    def __neg__(self):
        return Chain(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Chain":
        c = Poly.coerce(c)
        return Chain(self.alg, {k: v * c for k, v in self.terms.items()})

    def shift_u(self, k: int) -> "Chain":
        return Chain(self.alg, {(key[0] + k,) + key[1:]: v for key, v in self.terms.items()})

    def truncate(self, kind: UModuleKind | str) -> "Chain":
        kind = UModuleKind(kind)
        return Chain(self.alg, {k: v for k, v in self.terms.items() if kind.admits(k[0])})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, Chain) and self.alg == other.alg and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def degrees(self) -> set:
        """Hochschild degrees (slot count minus one) occurring in the chain."""
        return {len(k) - 2 for k in self.terms}

    def total_degrees(self) -> set:
        """Degrees in the u-graded complex: Hochschild degree minus twice the u-exponent."""
        return {len(k) - 2 - 2 * k[0] for k in self.terms}

    def key_deg(self, k) -> int:
        return self.alg.key_degree(k)

    def tensors(self):
        """Iterate ``(coeff, uexp, [elements])``."""
        for key, c in self.terms.items():
            yield c, key[0], [self.alg.assemble({k: Poly.const(1)}) for k in key[1:]]

    def __repr__(self):
        if not self.terms:
            return "Chain(0)"
        parts = []
        for key, c in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            slots = " ⊗ ".join(self.alg.key_str(k) for k in key[1:])
            u = f" u^{key[0]}" if key[0] else ""
            parts.append(f"({c}){u} [{slots}]")
        return " + ".join(parts)


def _accumulate(out: dict, key, c):
    out[key] = out.get(key, Poly()) + c


def b_diff(c: Chain) -> Chain:
    """Hochschild boundary; ``b(a_0) = 0``."""
    alg = c.alg
    out: dict = {}
    for key, coeff in c.terms.items():
        u, slots = key[0], key[1:]
        k = len(slots) - 1
        if k < 1:
            continue
        for i in range(k):
            sign = -1 if i % 2 else 1
            for m, mc in alg.mul_keys(slots[i], slots[i + 1]).items():
                _accumulate(out, (u,) + slots[:i] + (m,) + slots[i + 2 :], coeff * mc.scale(sign))
        dk = alg.key_degree(slots[-1])
        rest = sum(alg.key_degree(s) for s in slots[:-1])
        sign = (-1) ** (k + dk * rest)
        for m, mc in alg.mul_keys(slots[-1], slots[0]).items():
            _accumulate(out, (u, m) + slots[1:-1], coeff * mc.scale(sign))
    return Chain(alg, out)


def B_diff(c: Chain) -> Chain:
    """Connes' boundary ``B(a_0⊗…⊗a_k) = Σ_i ± 1⊗a_i⊗…⊗a_k⊗a_0⊗…⊗a_{i-1}``."""
    alg = c.alg
    unit = alg.unit_key
    out: dict = {}
    for key, coeff in c.terms.items():
        u, slots = key[0], key[1:]
        k = len(slots) - 1
        degs = [alg.key_degree(s) for s in slots]
        for i in range(k + 1):
            perm = list(range(i, k + 1)) + list(range(i))
            sign = (-1) ** (i * k) * _koszul(degs, perm)
            _accumulate(out, (u, unit) + tuple(slots[j] for j in perm), coeff.scale(sign))
    return Chain(alg, out)


def bB_diff(c: Chain, kind: UModuleKind | str = UModuleKind.PERIODIC) -> Chain:
    """The differential ``b + uB`` of the u-graded complex, truncated to ``kind``."""
    return (b_diff(c) + B_diff(c).shift_u(1)).truncate(kind)


def insert(a, c: Chain) -> Chain:
    """``ι_a(a_0⊗…⊗a_k) = Σ_i (−1)^{i+1} a_0⊗…⊗a_i⊗a⊗a_{i+1}⊗…⊗a_k``."""
    alg = c.alg
    parts = alg.split(a)
    out: dict = {}
    for key, coeff in c.terms.items():
        u, slots = key[0], key[1:]
        for i in range(len(slots)):
            sign = 1 if i % 2 else -1
            for ka, ca in parts.items():
                _accumulate(out, (u,) + slots[: i + 1] + (ka,) + slots[i + 1 :], coeff * ca.scale(sign))
    return Chain(alg, out)


def lie_act(a, c: Chain) -> Chain:
    """``L_a(a_0⊗…⊗a_k) = Σ_i a_0⊗…⊗[a, a_i]⊗…⊗a_k`` (ungraded commutator)."""
    alg = c.alg
    parts = alg.split(a)
    out: dict = {}
    for key, coeff in c.terms.items():
        u, slots = key[0], key[1:]
        for i, s in enumerate(slots):
            for ka, ca in parts.items():
                for m, mc in alg.mul_keys(ka, s).items():
                    _accumulate(out, (u,) + slots[:i] + (m,) + slots[i + 1 :], coeff * ca * mc)
                for m, mc in alg.mul_keys(s, ka).items():
                    _accumulate(out, (u,) + slots[:i] + (m,) + slots[i + 1 :], -(coeff * ca * mc))
    return Chain(alg, out)


def graded_lie_act(a, c: Chain, degree: int) -> Chain:
    """Slotwise graded commutator with a homogeneous element ``a`` of the given degree.

    ``Σ_i (−1)^{|a|(|a_0|+…+|a_{i-1}|)} a_0⊗…⊗[a, a_i]⊗…⊗a_k`` with
    ``[a, b] = ab − (−1)^{|a||b|} ba``; for ``degree = 0`` this is :func:`lie_act`.
    """
    alg = c.alg
    parts = alg.split(a)
    out: dict = {}
    for key, coeff in c.terms.items():
        u, slots = key[0], key[1:]
        before = 0
        for i, s in enumerate(slots):
            ds = alg.key_degree(s)
            pre = -1 if (degree * before) % 2 else 1
            swap = -1 if (degree * ds) % 2 else 1
            for ka, ca in parts.items():
                for m, mc in alg.mul_keys(ka, s).items():
                    _accumulate(out, (u,) + slots[:i] + (m,) + slots[i + 1 :], coeff * ca * mc.scale(pre))
                for m, mc in alg.mul_keys(s, ka).items():
                    _accumulate(out, (u,) + slots[:i] + (m,) + slots[i + 1 :], coeff * ca * mc.scale(-pre * swap))
            before += ds
    return Chain(alg, out)


def _shuffles(p: int, q: int):
    """All (p,q)-shuffles as lists ``perm`` with ``perm[pos] = source index``."""
    for ps in combinations(range(p + q), p):
        pset = set(ps)
        qs = [i for i in range(p + q) if i not in pset]
        perm = [None] * (p + q)
        for n, pos in enumerate(ps):
            perm[pos] = n
        for n, pos in enumerate(qs):
            perm[pos] = p + n
        yield perm


def shuffle(x: Chain, y: Chain) -> Chain:
    """Shuffle product ``(a_0⊗…⊗a_p) × (b_0⊗…⊗b_q)``."""
    x._check(y)
    alg = x.alg
    out: dict = {}
    for kx, cx in x.terms.items():
        ux, ax = kx[0], kx[1:]
        for ky, cy in y.terms.items():
            uy, by = ky[0], ky[1:]
            p, q = len(ax) - 1, len(by) - 1
            tail = list(ax[1:]) + list(by[1:])
            degs = [alg.key_degree(s) for s in tail]
            pre = (-1) ** (alg.key_degree(by[0]) * sum(degs[:p]))
            heads = alg.mul_keys(ax[0], by[0])
            for perm in _shuffles(p, q):
                sign = pre * _perm_sign(perm) * _koszul(degs, perm)
                tkeys = tuple(tail[j] for j in perm)
                for h, hc in heads.items():
                    _accumulate(out, (ux + uy, h) + tkeys, cx * cy * hc.scale(sign))
    return Chain(alg, out)


def cycle_c2n(alg: Algebra, n: int) -> Chain:
    """``c_{2n} = Σ_σ sgn(σ) 1⊗y_{σ(1)}⊗…⊗y_{σ(2n)}`` with ``y_{2i-1}=p_i``, ``y_{2i}=q_i``."""
    from itertools import permutations

    ys = []
    for i in range(1, n + 1):
        ys += [Poly.var(f"p{i}"), Poly.var(f"q{i}")]
    out = Chain.zero(alg)
    for perm in permutations(range(2 * n)):
        out = out + Chain.from_tensor(alg, [Poly.const(1)] + [ys[j] for j in perm], _perm_sign(perm))
    return out
