"""The character map from Hochschild/cyclic chains of ``U(L)`` to L-forms.

A chain ``D_0 ⊗ D_1 ⊗ … ⊗ D_l`` over the universal enveloping algebra is
transported to the Weyl side with the PBW isomorphism (each ``D_i`` becomes the
symbol of ``K_{D_i} = j ∘ (D_i ·) ∘ j^{-1}``), the Fedosov element ``A`` is
shuffled in, and the cyclic cocycle ``τ^w`` is evaluated.  Only slot tuples
whose weights ``deg_q − deg_p`` add up to zero can contribute, so each slot is
split by weight first and all other combinations are skipped.

Also here: the HKR map on base chains and the checks built on these maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Sequence

from .algebras import Algebra, WeylAlgebra
from .algebroid import Connection, LForm, Presentation, ce_diff
from .cocycle import tau_component
from .envelope import Envelope, UElement
from .homalg import B_diff, Chain, _perm_sign, b_diff
from .pbw import PBW, _mono_weight, fedosov_A, theta_operator, transport_symbol
from .scalar import LaurentU, Poly, integrate_ordered_simplex
from .weyl import MatrixWeyl


# ---------------------------------------------------------------------------
# U(L) as an algebra for chains
# ---------------------------------------------------------------------------
class UAlgebra(Algebra):
    """``U(L)`` with basis ``x^γ e^α``; keys are ``(base monomial, α)``."""

    def __init__(self, env: Envelope):
        self.env = env
        self._vars = frozenset(env.pres.variables)
        self.name = f"U({env.pres.name or ','.join(env.pres.variables)})"

    @property
    def unit_key(self):
        return ((), (0,) * self.env.r)

    def split(self, elem) -> dict:
        if not isinstance(elem, UElement):
            elem = self.env.scalar(elem)
        out: dict = {}
        for alpha, f in elem.terms.items():
            for mono, c in f.items():
                key = tuple((v, e) for v, e in mono if v in self._vars)
                spect = tuple((v, e) for v, e in mono if v not in self._vars)
                k = (key, alpha)
                out[k] = out.get(k, Poly()) + Poly({spect: c})
        return {k: v for k, v in out.items() if v}

    def assemble(self, parts: dict):
        terms: dict = {}
        for (mono, alpha), c in parts.items():
            terms[alpha] = terms.get(alpha, Poly()) + Poly({mono: 1}) * c
        return UElement(self.env, terms)

    def mul_keys(self, k1, k2) -> dict:
        a = self.assemble({k1: Poly.const(1)})
        b = self.assemble({k2: Poly.const(1)})
        return self.split(a * b)

    def __eq__(self, other):
        return isinstance(other, UAlgebra) and other.env == self.env

    def __hash__(self):
        return hash(("Ualg", hash(self.env)))


def base_chain_to_U(chain: Chain, env: Envelope) -> Chain:
    """The inclusion ``i: C(R) → C(U)`` of chains of base functions."""
    U = UAlgebra(env)
    out = Chain.zero(U)
    for c, uexp, elems in chain.tensors():
        out = out + Chain.from_tensor(U, [env.scalar(f) for f in elems], c, uexp)
    return out


# ---------------------------------------------------------------------------
# Weight-pruned accumulation of Weyl chains
# ---------------------------------------------------------------------------
def _weight_split(f: Poly) -> dict:
    out: dict = {}
    for mono, c in Poly.coerce(f).items():
        w = _mono_weight(mono)
        out.setdefault(w, {})[mono] = c
    return {w: Poly(t) for w, t in out.items()}


class _Slot:
    """A slot value split by weight; matrix slots keep one split per entry."""

    __slots__ = ("s", "parts")

    def __init__(self, value, s: int):
        self.s = s
        if s == 1:
            v = value.entries[0][0] if isinstance(value, MatrixWeyl) else Poly.coerce(value)
            self.parts = {(0, 0): _weight_split(v)}
        else:
            if not isinstance(value, MatrixWeyl):
                value = MatrixWeyl.scalar(Poly.coerce(value), s)
            self.parts = {}
            for i in range(s):
                for j in range(s):
                    if value[i, j]:
                        self.parts[(i, j)] = _weight_split(value[i, j])

    def entry(self, i: int, j: int) -> dict:
        return self.parts.get((i, j), {})


def _zero_weight_tuples(splits: Sequence[dict]):
    """All choices of one weight part per slot with weights adding up to zero."""
    lo = [min(s) for s in splits]
    hi = [max(s) for s in splits]
    suffix_lo = [0] * (len(splits) + 1)
    suffix_hi = [0] * (len(splits) + 1)
    for i in range(len(splits) - 1, -1, -1):
        suffix_lo[i] = suffix_lo[i + 1] + lo[i]
        suffix_hi[i] = suffix_hi[i + 1] + hi[i]

    def rec(i, total, chosen):
        if i == len(splits):
            if total == 0:
                yield list(chosen)
            return
        for w, f in splits[i].items():
            t = total + w
            if suffix_lo[i + 1] <= -t <= suffix_hi[i + 1]:
                chosen.append(f)
                yield from rec(i + 1, t, chosen)
                chosen.pop()

    yield from rec(0, 0, [])


class _WeylAccumulator:
    """Collects ``coeff · u^e · a_0 ⊗ … ⊗ a_L`` terms and evaluates ``τ^{w,s}`` once per length."""

    def __init__(self, n: int):
        self.n = n
        self.alg = WeylAlgebra(n)
        self.by_len: dict = {}

    def add(self, slots: Sequence[_Slot], coeff: Poly, uexp: int) -> None:
        L = len(slots)
        s = slots[0].s
        store = self.by_len.setdefault(L, {})
        for path in product(range(s), repeat=L):
            splits = [slots[i].entry(path[i], path[(i + 1) % L]) for i in range(L)]
            if any(not sp for sp in splits):
                continue
            for parts in _zero_weight_tuples(splits):
                acc = {(uexp,): coeff}
                for f in parts:
                    nxt: dict = {}
                    for key, c in acc.items():
                        for k, v in self.alg.split(f).items():
                            nk = key + (k,)
                            nxt[nk] = nxt.get(nk, Poly()) + c * v
                    acc = nxt
                for key, c in acc.items():
                    store[key] = store.get(key, Poly()) + c

    def evaluate(self, w_exp: int) -> LaurentU:
        out = LaurentU()
        for L, terms in sorted(self.by_len.items()):
            k = self.n - (L - 1) // 2
            if L % 2 == 0 or k < 0:
                continue
            val = tau_component(self.n, k, Chain(self.alg, terms))
            out = out + val.shift(w_exp - k)
        return out


# ---------------------------------------------------------------------------
# The character map
# ---------------------------------------------------------------------------
@dataclass
class CharacterOutput:
    """``Φ(D)`` as forms indexed by ``(form degree, u-exponent)``."""

    forms: dict

    def component(self, degree: int, uexp: int) -> LForm:
        return self.forms.get((degree, uexp), LForm.make(degree, {}))

    def keys(self):
        return sorted(k for k, f in self.forms.items() if not f.is_zero())

    def __add__(self, other: "CharacterOutput") -> "CharacterOutput":
        out = dict(self.forms)
        for k, f in other.forms.items():
            out[k] = out[k] + f if k in out else f
        return CharacterOutput({k: v for k, v in out.items() if not v.is_zero()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "CharacterOutput":
        return CharacterOutput({k: f.scale(c) for k, f in self.forms.items()})

    def subs(self, mapping: dict) -> "CharacterOutput":
        return CharacterOutput(
            {k: LForm.make(f.degree, {i: tuple(x.subs(mapping) for x in v) for i, v in f.coeffs.items()}) for k, f in self.forms.items()}
        )

    def map_coeffs(self, fn) -> "CharacterOutput":
        return CharacterOutput(
            {k: LForm.make(f.degree, {i: tuple(fn(x) for x in v) for i, v in f.coeffs.items()}) for k, f in self.forms.items()}
        )

    def d(self, pres: Presentation) -> "CharacterOutput":
        return CharacterOutput({(deg + 1, u): ce_diff(f, pres) for (deg, u), f in self.forms.items()})

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self.forms.values())

    def __eq__(self, other):
        return isinstance(other, CharacterOutput) and (self - other).is_zero()

    def to_json(self) -> dict:
        out = {}
        for (deg, u) in self.keys():
            f = self.forms[(deg, u)]
            out[f"deg{deg},u^{u}"] = {
                ",".join(str(i + 1) for i in idx) or "-": str(v[0]) for idx, v in sorted(f.coeffs.items())
            }
        return out


def _sign(k: int, l: int, s: int) -> int:
    """``(−1)^{α+s}`` with ``α = Σ_{i≤k} i + Σ_{j≤l} j`` and ``τ_{2s}`` the component in use.

    The ``(−1)^s`` offsets the ``(−1)^s`` of local Riemann–Roch, so that ``Φ(1)`` is the
    Chern–Weil form itself and ``Φ(c_2) = τ_2(c_2) = 1``.
    """
    e = k * (k + 1) // 2 + l * (l + 1) // 2 + s
    return -1 if e % 2 else 1


def _interleavings(idx, D, A, m: int, l: int):
    """Slot sequences ``D_0 ⊗ (A_{π(I)} shuffled with D_1…D_l)`` with ``sgn π · sgn(shuffle)``."""
    L = m + l
    for perm in permutations(range(m)):
        sp = _perm_sign(perm)
        for pos in combinations(range(L), m):
            seq = [D[0]]
            ai, di = 0, 1
            for slot in range(L):
                if ai < m and pos[ai] == slot:
                    seq.append(A[idx[perm[ai]]])
                    ai += 1
                else:
                    seq.append(D[di])
                    di += 1
            shuffle = sum(p - j for j, p in enumerate(pos))
            yield seq, -sp if shuffle % 2 else sp


def _inserted(seq, theta):
    """Cochain-side ``ι_θ``: minus the transpose of the chain insertion, i.e. terms
    ``(−1)^i a_0⊗…⊗a_i⊗θ⊗a_{i+1}⊗…⊗a_L``."""
    for i in range(len(seq)):
        yield seq[: i + 1] + [theta] + seq[i + 1 :], (-1 if i % 2 else 1)


class _Evaluator:
    """Shared machinery: transported symbols, the Fedosov element, and τ evaluation."""

    def __init__(self, pres: Presentation, conn: Connection, econn: Connection | None, w_exp: int):
        self.pres = pres
        self.n = pres.rank
        self.pbw = PBW(pres, conn, econn)
        self.env = self.pbw.env
        self.U = UAlgebra(self.env)
        self.s = self.pbw.s
        self.w_exp = w_exp
        self._A: dict = {}
        self._sym: dict = {}

    def fedosov(self, N: int) -> list:
        if N not in self._A:
            A = fedosov_A(self.pbw, N)
            self._A[N] = [_Slot(A.symbol(a), self.s) for a in range(self.n)]
        return self._A[N]

    def symbol(self, key, N: int) -> _Slot:
        if (key, N) not in self._sym:
            if key == self.U.unit_key:
                val = Poly.const(1)
            else:
                val = transport_symbol(self.pbw, self.U.assemble({key: Poly.const(1)}), N)
            self._sym[(key, N)] = _Slot(val, self.s)
        return self._sym[(key, N)]

    def order_for(self, slots, m: int) -> int:
        """Weyl truncation sufficient for every slot: total p-degree available plus ``ι_π`` insertions."""
        return m + sum(sum(k[1]) for k in slots) + self.n

    def check_chain(self, chain: Chain) -> None:
        if chain.alg != self.U:
            raise TypeError("chain must live over U(L) of this presentation")

    def evaluate(self, chain: Chain, degrees, k: int, theta=None) -> CharacterOutput:
        """``Φ^k`` on ``chain``; ``theta(N)`` supplies the inserted slot when ``k = 1``."""
        self.check_chain(chain)
        forms: dict = {}
        for m in range(self.n + 1) if degrees is None else degrees:
            for idx in combinations(range(self.n), m):
                acc = _WeylAccumulator(self.n)
                for key, c in chain.terms.items():
                    uexp, slots = key[0], key[1:]
                    l = len(slots) - 1
                    total = 1 + m + l + k
                    if total % 2 == 0 or total > 2 * self.n + 1:
                        continue
                    s = (total - 1) // 2
                    N = self.order_for(slots, m) + k
                    A = self.fedosov(N)
                    D = [self.symbol(kk, N) for kk in slots]
                    base = c.scale(_sign(k, l, s))
                    for seq, sign in _interleavings(idx, D, A, m, l):
                        if k == 0:
                            acc.add(seq, base.scale(sign), uexp)
                        else:
                            th = theta(N)
                            for seq2, s2 in _inserted(seq, th):
                                acc.add(seq2, base.scale(sign * s2), uexp)
                val = acc.evaluate(self.w_exp)
                for u, v in val.coeffs.items():
                    forms.setdefault((m, u), {})[idx] = v
        return CharacterOutput({key: LForm.make(key[0], v) for key, v in forms.items() if any(v.values())})


class CharacterMap(_Evaluator):
    """``Φ = Φ^0`` for one connection on ``L`` and an optional connection on a trivial bundle ``E``.

    ``w_exp`` is the exponent of the tag ``w = u^{w_exp}`` in ``τ^w``.
    """

    def __init__(self, pres: Presentation, conn: Connection, econn: Connection | None = None, w_exp: int = 0):
        super().__init__(pres, conn, econn, w_exp)

    def __call__(self, chain: Chain, degrees: Sequence[int] | None = None) -> CharacterOutput:
        return self.evaluate(chain, degrees, 0)


class FamilyCharacterMap(_Evaluator):
    """The affine family ``∇_t = (1−t)∇^0 + t∇^1`` on one chart.

    ``phi0(D)`` is ``Φ^0`` along the family (a polynomial in ``t``), ``endpoint(D, i)`` its value
    at ``t = i`` and ``phi1(D)`` the term ``∫_0^1 ι_θ τ^w(1⊗exp(∧A(t)) × D) dt``.
    """

    TVAR = "t"

    def __init__(self, pres: Presentation, pair0, pair1, w_exp: int = 0):
        (c0, e0), (c1, e1) = pair0, pair1
        t = Poly.var(self.TVAR)
        conn = c0.combine(c1, t)
        econn = None if e0 is None else e0.combine(e1, t)
        super().__init__(pres, conn, econn, w_exp)
        self._theta: dict = {}

    def theta(self, N: int) -> _Slot:
        if N not in self._theta:
            if self.s != 1:
                raise NotImplementedError("the k=1 term is implemented for untwisted families")
            op = theta_operator(self.pbw, N + 1, self.TVAR)
            self._theta[N] = _Slot(op.symbol(self.n), self.s)
        return self._theta[N]

    def phi0(self, chain: Chain, degrees=None) -> CharacterOutput:
        return self.evaluate(chain, degrees, 0)

    def endpoint(self, chain: Chain, which: int, degrees=None) -> CharacterOutput:
        return self.phi0(chain, degrees).subs({self.TVAR: Poly.const(which)})

    def phi1(self, chain: Chain, degrees=None) -> CharacterOutput:
        raw = self.evaluate(chain, degrees, 1, self.theta)
        return raw.map_coeffs(lambda f: integrate_ordered_simplex(f, 1, [self.TVAR]))


# ---------------------------------------------------------------------------
# HKR
# ---------------------------------------------------------------------------
class NonBaseEntry(ValueError):
    """A chain slot that is not a function on the base."""


def hkr(chain: Chain, pres: Presentation) -> CharacterOutput:
    """``f_0 ⊗ … ⊗ f_k ↦ (1/k!) f_0 d_L f_1 ∧ … ∧ d_L f_k``, keyed by ``(degree, u-exponent)``.

    The ``1/k!`` makes the map send ``B`` to ``d_L``; on ``k ≤ 1`` it is the bare formula.
    """
    base = set(pres.variables)
    out = CharacterOutput({})
    for c, uexp, elems in chain.tensors():
        polys = [Poly.coerce(e) if not isinstance(e, UElement) else _base_part(e) for e in elems]
        for f in polys:
            if any(v not in base for v in f.variables()):
                raise NonBaseEntry(f"slot {f} is not a base function")
        form = LForm.function(polys[0] * c)
        for f in polys[1:]:
            form = form.wedge(ce_diff(LForm.function(f), pres))
        k = len(polys) - 1
        out = out + CharacterOutput({(k, uexp): form.scale(Fraction(1, math.factorial(k)))})
    return out


def _base_part(e: UElement) -> Poly:
    if any(sum(a) for a in e.terms):
        raise NonBaseEntry(f"slot {e} has positive filtration")
    return e.terms.get((0,) * e.env.r, Poly())


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------
def shift_u(out: CharacterOutput, k: int) -> CharacterOutput:
    return CharacterOutput({(d, u + k): f for (d, u), f in out.forms.items()})


def _form_text(out: CharacterOutput) -> dict:
    return out.to_json()


def _compare(check: str, anchor: str, inputs: str, lhs: CharacterOutput, rhs: CharacterOutput, sw, note: str = ""):
    from .report import CheckRecord

    return CheckRecord(check, anchor, inputs, _form_text(lhs), _form_text(rhs), (lhs - rhs).is_zero(), sw.elapsed, note)


def chain_map_check(cm: CharacterMap, chain: Chain, label: str = ""):
    """``Φ(bD) − Φ(BD) = d_L Φ(D)`` componentwise; the ``B`` term uses the next ``τ`` level."""
    from .report import digest, timed

    with timed() as sw:
        lhs = cm(b_diff(chain)) - shift_u(cm(B_diff(chain)), -1)
        rhs = cm(chain).d(cm.pres)
    return _compare("chain-map", "character map is a map of complexes (k=0)", digest(label, chain), lhs, rhs, sw)


def homotopy_check(fm: FamilyCharacterMap, chain: Chain, label: str = ""):
    """``Φ¹(bD) − Φ¹(BD) = (Φ_{∇¹} − Φ_{∇⁰})(D) − d_L Φ¹(D)`` for a two-connection family."""
    from .report import digest, timed

    with timed() as sw:
        lhs = fm.phi1(b_diff(chain)) - shift_u(fm.phi1(B_diff(chain)), -1)
        rhs = fm.endpoint(chain, 1) - fm.endpoint(chain, 0) - fm.phi1(chain).d(fm.pres)
    return _compare("homotopy", "two-connection family (k=1)", digest(label, chain), lhs, rhs, sw)


def chern_weil_side(pres: Presentation, conn: Connection, econn: Connection | None, w_exp: int, convention: str = "calibrated") -> CharacterOutput:
    """``χ(Td·Ch)`` from the curvatures, component ``2j`` placed at ``u^{w−n+j}``."""
    from .chernweil import TdCh, algebroid_cw

    n = pres.rank
    s = 1 if econn is None else econn.module_rank
    P = TdCh(n, s, n // 2 + 1, convention)
    return CharacterOutput({(2 * j, w_exp - n + j): algebroid_cw(pres, conn, econn, P, j) for j in range(n // 2 + 1)})


def index_check(pres: Presentation, conn: Connection, econn: Connection | None = None, w_exp: int = 0, convention: str = "calibrated", label: str = ""):
    """``Φ(1) = χ(Td·Ch)`` componentwise at chain level."""
    from .report import digest, timed

    with timed() as sw:
        cm = CharacterMap(pres, conn, econn, w_exp)
        lhs = cm(Chain.from_tensor(cm.U, [cm.env.one()]))
        rhs = chern_weil_side(pres, conn, econn, w_exp, convention)
    return _compare("index", "index identity Phi(1) = Td Ch", digest(label, pres, conn, econn, convention, w_exp), lhs, rhs, sw)


def hkr_side(chain: Chain, pres: Presentation, conn: Connection, econn: Connection | None, w_exp: int, convention: str = "calibrated") -> CharacterOutput:
    """``Σ (−1)^k HKR_k ∧ χ(Td·Ch)_{2j}`` at ``u^{w−n+k+j}`` (chain u-exponents carried along)."""
    n = pres.rank
    cw = chern_weil_side(pres, conn, econn, w_exp, convention)
    out = CharacterOutput({})
    for (k, u), h in hkr(chain, pres).forms.items():
        for (deg, uc), f in cw.forms.items():
            if k + deg > n:
                continue
            form = h.wedge(f).scale(-1 if k % 2 else 1)
            out = out + CharacterOutput({(k + deg, u + uc + k): form})
    return out


def hkr_compat_check(pres: Presentation, conn: Connection, chain: Chain, econn: Connection | None = None, w_exp: int = 0, convention: str = "calibrated", label: str = ""):
    """``Φ(i(c)) = HKR(c) ∧ χ(Td·Ch)`` with the sign ``(−1)^k`` on ``HKR_k``."""
    from .report import digest, timed

    with timed() as sw:
        cm = CharacterMap(pres, conn, econn, w_exp)
        lhs = cm(base_chain_to_U(chain, cm.env))
        rhs = hkr_side(chain, pres, conn, econn, w_exp, convention)
    return _compare("hkr-compat", "compatibility with HKR", digest(label, pres, conn, econn, chain, w_exp), lhs, rhs, sw)


def hkr_mixed_check(chain: Chain, pres: Presentation, label: str = ""):
    """``HKR(b c) = 0`` and ``HKR(B c) = d_L HKR(c)``."""
    from .report import CheckRecord, digest, timed

    with timed() as sw:
        hb = hkr(b_diff(chain), pres)
        hB = shift_u(hkr(B_diff(chain), pres), 0)
        dh = hkr(chain, pres).d(pres)
    ok = hb.is_zero() and (hB - dh).is_zero()
    return CheckRecord("hkr-mixed", "HKR is a mixed-complex map", digest(label, chain), {"b": hb.to_json(), "B": hB.to_json()}, {"b": {}, "B": dh.to_json()}, ok, sw.elapsed)


def u_positivity_check(cm: CharacterMap, chain: Chain, label: str = ""):
    """For a negative-kind chain and ``w = u^n`` no negative u-exponents appear."""
    from .report import CheckRecord, digest, timed

    with timed() as sw:
        if any(k[0] < 0 for k in chain.terms):
            raise ValueError("negative-kind chains carry only u-exponents >= 0")
        out = cm(chain)
        exps = sorted({u for (_, u) in out.keys()})
    return CheckRecord("u-positivity", "w = u^n tag for the negative theory", digest(label, chain, cm.w_exp), exps, ">= 0", all(e >= 0 for e in exps), sw.elapsed)
