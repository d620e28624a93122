"""The fundamental Hochschild cocycle on W_n, its cyclic extension, the matrix
extension and the evaluation map to Lie algebra cochains.

Evaluating ``μ ∘ Π_{i<j} exp(λ_ij π_ji)`` on a tuple of fiber monomials is a
Wick-contraction sum: every ``q^k`` occurring in one slot must be paired with
a ``p_k`` in a different slot, and a pair (q in slot a, p in slot b) carries
the weight ``sgn(b − a)·λ_{min(a,b) max(a,b)}`` with ``λ_ij = t_j − t_i − ½``
and ``t_0 = 0``.  Summing over pairings per fiber index, multiplying the
resulting t-polynomials and integrating over the ordered simplex gives the
cocycle exactly; nothing is expanded that cannot survive evaluation at zero.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Callable, Sequence

from .algebras import MatrixAlgebra, WeylAlgebra
from .homalg import Chain, _perm_sign, insert
from .scalar import LaurentU, Poly, integrate_ordered_simplex
from .weyl import DEFAULT_MOYAL, MatrixWeyl, fiber_index

#: Order in which the two insertions of ``ι_π = Σ ι_{p_i} ι_{q^i}`` hit a chain.  The
#: cochain operator ``ι_{p}ι_{q}`` is the transpose of applying ``ι_p`` first, then ``ι_q``.
IOTA_ORDERS = ("p-then-q", "q-then-p")
DEFAULT_IOTA_ORDER = "p-then-q"


class ArityError(ValueError):
    pass


def _t(i: int) -> Poly:
    return Poly.var(f"t{i}") if i else Poly()


@lru_cache(maxsize=None)
def _lam(a: int, b: int) -> Poly:
    """Weight of pairing a q in slot a with a p in slot b."""
    i, j = min(a, b), max(a, b)
    lam = _t(j) - _t(i) - Fraction(1, 2)
    return lam if b > a else -lam


def _compositions(total: int, caps: Sequence[int]):
    """Vectors v with 0 ≤ v_i ≤ caps_i and Σ v = total."""
    if not caps:
        if total == 0:
            yield ()
        return
    head, rest = caps[0], caps[1:]
    room = sum(rest)
    for v in range(max(0, total - room), min(head, total) + 1):
        for tail in _compositions(total - v, rest):
            yield (v,) + tail


@lru_cache(maxsize=None)
def wick_sum(alpha: tuple, beta: tuple) -> Poly:
    """Σ over q→p pairings (never within one slot) of the product of pair weights.

    ``alpha[s]``/``beta[s]`` are the q/p exponents of one fiber index in slot ``s``.
    """
    if sum(alpha) != sum(beta):
        return Poly()
    L = len(alpha)
    pref = math.prod(math.factorial(a) for a in alpha) * math.prod(math.factorial(b) for b in beta)

    def rows(a: int, remaining: tuple) -> list:
        if a == L:
            return [((), Poly.const(1))] if not any(remaining) else []
        caps = tuple(0 if b == a else remaining[b] for b in range(L))
        out = []
        for row in _compositions(alpha[a], caps):
            weight = Poly.const(Fraction(1, math.prod(math.factorial(x) for x in row)))
            for b, nab in enumerate(row):
                if nab:
                    weight = weight * _lam(a, b) ** nab
            rem = tuple(r - x for r, x in zip(remaining, row))
            for tail_rows, tail_w in rows(a + 1, rem):
                out.append(((row,) + tail_rows, weight * tail_w))
        return out

    total = Poly()
    for _, w in rows(0, beta):
        total = total + w
    return total.scale(pref)


def _fiber_profile(monos: Sequence[tuple]) -> dict:
    """Per fiber index, the (alpha, beta) exponent vectors across slots."""
    idx = set()
    for m in monos:
        for v, _ in m:
            idx.add(fiber_index(v))
    prof = {}
    for s in idx:
        alpha = tuple(dict(m).get("q" + s, 0) for m in monos)
        beta = tuple(dict(m).get("p" + s, 0) for m in monos)
        prof[s] = (alpha, beta)
    return prof


@lru_cache(maxsize=500_000)
def pairing_integral(monos: tuple) -> Fraction:
    """``∫_{Δ^L} μ Π_{i<j} exp(λ_ij π_ji)(m_0 ⊗ … ⊗ m_L)`` for fiber monomials ``m_s``."""
    L = len(monos) - 1
    prod = Poly.const(1)
    for alpha, beta in _fiber_profile(monos).values():
        w = wick_sum(alpha, beta)
        if not w:
            return Fraction(0)
        prod = prod * w
    val = integrate_ordered_simplex(prod, L)
    return val.const_term()


@lru_cache(maxsize=None)
def _top_derivations(n: int) -> tuple:
    """Signed sequences of fiber derivations realizing ``∂_{p_1}∧∂_{q_1}∧…∧∂_{p_n}∧∂_{q_n}``."""
    ds = []
    for i in range(1, n + 1):
        ds += [f"p{i}", f"q{i}"]
    return tuple((_perm_sign(perm), tuple(ds[j] for j in perm)) for perm in permutations(range(2 * n)))


def _diff_mono(m: tuple, name: str):
    d = dict(m)
    e = d.get(name, 0)
    if not e:
        return None, 0
    if e == 1:
        del d[name]
    else:
        d[name] = e - 1
    return tuple((v, d[v]) for v, _ in m if v in d), e


@lru_cache(maxsize=500_000)
def tau_hoch_monomials(n: int, monos: tuple) -> Fraction:
    """τ_{2n}^{Hoch} on a tuple of 2n+1 pure fiber monomials (coefficient 1)."""
    if len(monos) != 2 * n + 1:
        raise ArityError(f"tau_{2 * n} takes {2 * n + 1} arguments")
    total = Fraction(0)
    for sign, ders in _top_derivations(n):
        coeff = sign
        new = [monos[0]]
        for m, name in zip(monos[1:], ders):
            dm, e = _diff_mono(m, name)
            if dm is None:
                coeff = 0
                break
            coeff *= e
            new.append(dm)
        if coeff:
            total += coeff * pairing_integral(tuple(new))
    return total


def _split_fiber(f) -> dict:
    return WeylAlgebra(0).split(Poly.coerce(f))


def tau_hoch(n: int, args: Sequence) -> Poly:
    """τ_{2n}^{Hoch}(a_0 ⊗ … ⊗ a_{2n}); non-fiber variables are treated as scalars."""
    if len(args) != 2 * n + 1:
        raise ArityError(f"tau_{2 * n} takes {2 * n + 1} arguments, got {len(args)}")
    parts = [_split_fiber(a) for a in args]
    return _multilinear(parts, lambda monos: tau_hoch_monomials(n, monos))


def _multilinear(parts: list, f: Callable) -> Poly:
    acc = {(): Poly.const(1)}
    for pt in parts:
        nxt: dict = {}
        for key, c in acc.items():
            for k, v in pt.items():
                nxt[key + (k,)] = nxt.get(key + (k,), Poly()) + c * v
        acc = nxt
    out = Poly()
    for key, c in acc.items():
        val = f(key)
        if val:
            out = out + c.scale(val)
    return out


def tau_on_chain(n: int, chain: Chain) -> LaurentU:
    """Apply τ_{2n}^{Hoch} to a chain of length 2n+1 (other lengths contribute zero)."""
    out: dict = {}
    for key, c in chain.terms.items():
        if len(key) - 1 != 2 * n + 1:
            continue
        val = tau_hoch_monomials(n, key[1:])
        if val:
            out[key[0]] = out.get(key[0], Poly()) + c.scale(val)
    return LaurentU(out)


# ---------------------------------------------------------------------------
# ι_π contractions and lower components
# ---------------------------------------------------------------------------
def iota_pi(chain: Chain, n: int, order: str = DEFAULT_IOTA_ORDER) -> Chain:
    """Chain-level ``ι_π = Σ_i ι_{p_i} ι_{q^i}`` in the requested application order."""
    out = Chain.zero(chain.alg)
    for i in range(1, n + 1):
        pi, qi = Poly.var(f"p{i}"), Poly.var(f"q{i}")
        if order == "q-then-p":
            out = out + insert(pi, insert(qi, chain))
        elif order == "p-then-q":
            out = out + insert(qi, insert(pi, chain))
        else:
            raise ValueError(f"unknown iota order {order!r}")
    return out


def tau_component(n: int, k: int, chain: Chain, order: str = DEFAULT_IOTA_ORDER) -> LaurentU:
    """The ``u^{-k}`` component of ``e^{−u^{-1}ι_π} τ_{2n}^{Hoch}``, i.e. ``(−1)^k τ(ι_π^k c)/k!``.

    u-exponents of the chain are carried along unchanged.
    """
    c = chain
    for _ in range(k):
        c = iota_pi(c, n, order)
    return tau_on_chain(n, c) * Poly.const(Fraction((-1) ** k, math.factorial(k)))


def closedness_residue(n: int, k: int, chain: Chain, order: str = DEFAULT_IOTA_ORDER) -> LaurentU:
    """``τ_{2n-2k-2}(b c) − τ_{2n-2k}(B c)`` for a chain of degree ``2n−2k−1``.

    This is the ``u^{-k-1}`` coefficient of ``(b + u^{-1}B)τ^w`` when ``b`` acts on cochains
    by precomposition and ``B`` by ``φ ↦ −φ∘B``; it vanishes for a closed cochain.
    """
    from .homalg import B_diff, b_diff

    return tau_component(n, k + 1, b_diff(chain), order) - tau_component(n, k, B_diff(chain), order)


def _weyl_chain(n: int, args: Sequence, convention: str = DEFAULT_MOYAL) -> Chain:
    return Chain.from_tensor(WeylAlgebra(n, convention), list(args))


def tau_lower(n: int, args: Sequence, order: str = DEFAULT_IOTA_ORDER) -> Poly:
    """τ_{2m} on ``2m+1`` Weyl arguments, ``m ≤ n``, via ι_π contraction."""
    L = len(args)
    if L % 2 == 0:
        raise ArityError("cyclic components have odd slot count")
    k = n - (L - 1) // 2
    if k < 0:
        raise ArityError("too many arguments")
    val = tau_component(n, k, _weyl_chain(n, args), order)
    return val[0]



def tau_cyclic(n: int, args: Sequence, w_exp: int = 0, order: str = DEFAULT_IOTA_ORDER) -> LaurentU:
    """The component of ``τ^w_{2n}`` (``w = u^{w_exp}``) on ``args``.

    The degree-``2n−2k`` component sits at ``u^{w_exp − k}``.
    """
    L = len(args)
    if L % 2 == 0:
        raise ArityError("odd number of arguments required")
    k = n - (L - 1) // 2
    return LaurentU({w_exp - k: tau_lower(n, args, order)})


def tau_matrix(n: int, r: int, args: Sequence[MatrixWeyl], w_exp: int = 0, order: str = DEFAULT_IOTA_ORDER) -> LaurentU:
    """``τ^{w,r}((a_0⊗M_0)⊗…) = τ^w(a_0⊗…)·tr(M_0…M_k)`` extended linearly to matrix entries."""
    for a in args:
        if not isinstance(a, MatrixWeyl) or a.r != r:
            raise ValueError(f"expected {r}x{r} MatrixWeyl arguments")
    L = len(args)
    if L % 2 == 0:
        raise ArityError("odd number of arguments required")
    k = n - (L - 1) // 2
    # trace of a product of matrix units: sum over closed index paths
    total = Poly()
    for idx in _closed_paths(r, L):
        entries = [args[s][idx[s], idx[(s + 1) % L]] for s in range(L)]
        if any(not e for e in entries):
            continue
        total = total + tau_lower(n, entries, order)
    return LaurentU({w_exp - k: total})


def _closed_paths(r: int, L: int):
    from itertools import product

    return product(range(r), repeat=L)


def tau_matrix_chain(n: int, chain: Chain, w_exp: int = 0, order: str = DEFAULT_IOTA_ORDER) -> LaurentU:
    """τ^{w,r} applied to a chain over ``M_r(W_n)``; each term contributes at ``u^{uexp + w_exp − k}``."""
    alg = chain.alg
    if not isinstance(alg, MatrixAlgebra):
        raise TypeError("matrix chain expected")
    out = LaurentU()
    for c, uexp, elems in chain.tensors():
        val = tau_matrix(n, alg.r, elems, w_exp, order)
        out = out + val.shift(uexp) * c
    return out


# ---------------------------------------------------------------------------
# Evaluation map to Lie algebra cochains
# ---------------------------------------------------------------------------
def ev1_to_lie(phi: Callable[[list], object], k: int) -> Callable[..., object]:
    """``ev_1(φ)(a_1,…,a_k) = Σ_σ (−1)^σ φ(1⊗a_{σ(1)}⊗…⊗a_{σ(k)})``.

    ``phi`` receives the list of ``k+1`` arguments; its return values must support ``+``
    and scalar multiplication.  The unit is supplied by the caller-facing wrapper.
    """

    def cochain(*args, one=None):
        if len(args) != k:
            raise ArityError(f"Lie cochain of arity {k} got {len(args)} arguments")
        unit = one if one is not None else _unit_like(args[0] if args else None)
        total = None
        for perm in permutations(range(k)):
            val = phi([unit] + [args[j] for j in perm])
            val = val * _perm_sign(perm)
            total = val if total is None else total + val
        return total

    cochain.arity = k
    return cochain


def _unit_like(x):
    if isinstance(x, MatrixWeyl):
        return MatrixWeyl.scalar(Poly.const(1), x.r)
    return Poly.const(1)


def c2n_args(n: int) -> list:
    """Elementary tensors of the cycle ``c_{2n}`` as (sign, argument list) pairs."""
    ys = []
    for i in range(1, n + 1):
        ys += [Poly.var(f"p{i}"), Poly.var(f"q{i}")]
    return [(_perm_sign(perm), [Poly.const(1)] + [ys[j] for j in perm]) for perm in permutations(range(2 * n))]


def tau_c2n(n: int) -> Fraction:
    """τ_{2n}(c_{2n}); equals 1 under the normalization."""
    return sum((s * tau_hoch(n, args).const_term() for s, args in c2n_args(n)), Fraction(0))
