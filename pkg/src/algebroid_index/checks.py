"""Named checks behind the verification suites.

Each check is a function ``check(cfg) -> Outcome`` registered under a short
id.  The suites in ``data/suites.json`` are lists of these ids, so adding a
suite never needs new code paths.  Every check builds its inputs from
bundled data or from a seeded :class:`random.Random`, which keeps the
records identical from run to run.

Corpus checks (hundreds of small identities) produce one record whose
sides are failure counts, ``{"failing": k, "total": n}`` against
``{"failing": 0, "total": n}``, with the first failing case in the note.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .algebras import FormAlgebra, PolyAlgebra, WeylAlgebra
from .chernweil import DEFAULT_TD, TD_CONVENTIONS, TdCh, chi, curvature_C, ch_scalar_series, td_scalar_series
from .cocycle import closedness_residue, ev1_to_lie, tau_hoch, tau_matrix, tau_on_chain
from .homalg import B_diff, Chain, b_diff, cycle_c2n, graded_lie_act, insert, lie_act, shuffle
from .report import CheckRecord, Stopwatch, digest
from .scalar import LaurentU, Poly
from .weyl import DEFAULT_MOYAL, MOYAL_SCALE, MatrixWeyl, moyal, project_gl, star_commutator

__all__ = ["Config", "Outcome", "CHECKS", "register", "run_check"]


@dataclass(frozen=True)
class Config:
    """Flags shared by all checks; ``None`` means "the check's own default"."""

    moyal: str = DEFAULT_MOYAL
    td: str = DEFAULT_TD
    u_kind: str = "negative"
    w: int | None = None
    order: int | None = None
    presentation: str | None = None
    presentation2: str | None = None
    chain: str | None = None


@dataclass
class Outcome:
    records: list = field(default_factory=list)
    adjudications: list = field(default_factory=list)

    def extend(self, other: "Outcome") -> "Outcome":
        self.records += other.records
        self.adjudications += other.adjudications
        return self


CHECKS: dict[str, Callable[[Config], Outcome]] = {}


def register(name: str):
    def deco(fn):
        if name in CHECKS:
            raise ValueError(f"check {name!r} registered twice")
        CHECKS[name] = fn
        fn.check_id = name
        return fn

    return deco


def run_check(name: str, cfg: Config) -> Outcome:
    try:
        fn = CHECKS[name]
    except KeyError:
        raise KeyError(f"unknown check {name!r}") from None
    return fn(cfg)


# ---------------------------------------------------------------------------
# record helpers
# ---------------------------------------------------------------------------
def jsonable(x):
    """Exact values as JSON: rationals and polynomials become their canonical text."""
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, (Fraction, Poly)):
        return str(x)
    if isinstance(x, LaurentU):
        return {str(k): str(x[k]) for k in sorted(x.exponents())}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return str(x)


def record(check, anchor, inputs, lhs, rhs, equal, sw: Stopwatch, note: str = "") -> CheckRecord:
    return CheckRecord(check, anchor, digest(check, *inputs), jsonable(lhs), jsonable(rhs), bool(equal), sw.elapsed, note)


def equality(check, anchor, inputs, lhs, rhs, sw, note: str = "") -> CheckRecord:
    return record(check, anchor, inputs, lhs, rhs, lhs == rhs, sw, note)


class Corpus:
    """Counts the cases of a corpus identity and remembers the first failure."""

    def __init__(self):
        self.total = 0
        self.failing = 0
        self.witness = ""

    def add(self, ok: bool, label) -> None:
        self.total += 1
        if not ok:
            self.failing += 1
            if not self.witness:
                self.witness = f"first failure: {label}"

    def record(self, check, anchor, inputs, sw) -> CheckRecord:
        lhs = {"failing": self.failing, "total": self.total}
        rhs = {"failing": 0, "total": self.total}
        return record(check, anchor, inputs, lhs, rhs, self.failing == 0, sw, self.witness)


def weyl_names(n: int) -> list:
    return [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]


def monomial_basis(names, max_degree: int) -> list:
    """All monomials of total degree ``≤ max_degree``, degree first, in a fixed order."""
    out = []
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(names, d):
            exps: dict = {}
            for v in combo:
                exps[v] = exps.get(v, 0) + 1
            out.append(Poly.monomial(exps))
    return out


def random_poly(rng: random.Random, names, max_degree: int, max_terms: int = 3) -> Poly:
    f = Poly()
    for _ in range(rng.randint(1, max_terms)):
        exps: dict = {}
        for _ in range(rng.randint(0, max_degree)):
            v = rng.choice(names)
            exps[v] = exps.get(v, 0) + 1
        f = f + Poly.monomial(exps, rng.choice([-3, -2, -1, 1, 2, 3]))
    return f


def random_chain(rng: random.Random, alg, names, max_chain_degree: int, max_entry_degree: int) -> Chain:
    out = Chain.zero(alg)
    for _ in range(rng.randint(1, 2)):
        k = rng.randint(0, max_chain_degree)
        entries = [random_poly(rng, names, max_entry_degree, 2) for _ in range(k + 1)]
        out = out + Chain.from_tensor(alg, entries, rng.choice([-2, -1, 1, 2]))
    return out


# ---------------------------------------------------------------------------
# 1. normalization
# ---------------------------------------------------------------------------
def _tau_c2n(n: int, convention: str) -> Fraction:
    return tau_on_chain(n, cycle_c2n(WeylAlgebra(n, convention), n))[0].const_term()


@register("tau2-c2")
def check_tau2(cfg: Config) -> Outcome:
    sw = Stopwatch()
    val = _tau_c2n(1, cfg.moyal)
    return Outcome([equality("tau2-c2", "normalization of the fundamental cocycle, n=1", ["n=1", cfg.moyal], val, Fraction(1), sw)])


@register("tau4-c4")
def check_tau4(cfg: Config) -> Outcome:
    sw = Stopwatch()
    val = _tau_c2n(2, cfg.moyal)
    return Outcome([equality("tau4-c4", "normalization of the fundamental cocycle, n=2", ["n=2", cfg.moyal], val, Fraction(1), sw)])


# ---------------------------------------------------------------------------
# 2. Moyal product
# ---------------------------------------------------------------------------
def _assoc(n: int, count: int, seed: int, cfg: Config) -> CheckRecord:
    sw = Stopwatch()
    rng = random.Random(seed)
    names = weyl_names(n)
    corpus = Corpus()
    for i in range(count):
        f, g, h = (random_poly(rng, names, 4) for _ in range(3))
        lhs = moyal(moyal(f, g, cfg.moyal, n), h, cfg.moyal, n)
        rhs = moyal(f, moyal(g, h, cfg.moyal, n), cfg.moyal, n)
        corpus.add(lhs == rhs, f"triple {i}: ({f}, {g}, {h})")
    return corpus.record(f"moyal-assoc-w{n}", "associativity of the star product", [n, count, seed, cfg.moyal], sw)


@register("moyal-assoc-w1")
def check_assoc_w1(cfg: Config) -> Outcome:
    return Outcome([_assoc(1, 100, 11, cfg)])


@register("moyal-assoc-w2")
def check_assoc_w2(cfg: Config) -> Outcome:
    return Outcome([_assoc(2, 25, 12, cfg)])


@register("moyal-ccr")
def check_ccr(cfg: Config) -> Outcome:
    """``[p_i, q^j] = δ_ij`` for n = 2, plus the adjudication of the ordering flag."""
    out = Outcome()
    sw = Stopwatch()
    lhs, rhs = {}, {}
    for i in (1, 2):
        for j in (1, 2):
            key = f"[p{i},q{j}]"
            lhs[key] = star_commutator(Poly.var(f"p{i}"), Poly.var(f"q{j}"), cfg.moyal, 2)
            rhs[key] = Poly.const(1 if i == j else 0)
    out.records.append(equality("moyal-ccr", "canonical commutation relations", [cfg.moyal], lhs, rhs, sw))
    verdict = {}
    for conv in sorted(MOYAL_SCALE):
        verdict[conv] = str(star_commutator(Poly.var("p1"), Poly.var("q1"), conv, 1))
    out.adjudications.append(
        {
            "flag": "moyal-convention",
            "criterion": "[p, q] = 1 (isomorphism with differential operators)",
            "values": verdict,
            "satisfied_by": sorted(c for c, v in verdict.items() if v == "1"),
            "selected": cfg.moyal,
        }
    )
    return out


@register("moyal-examples")
def check_moyal_examples(cfg: Config) -> Outcome:
    sw = Stopwatch()
    p, q = Poly.var("p1"), Poly.var("q1")
    lhs = {"p*q": moyal(p, q, "symmetric"), "q*p": moyal(q, p, "symmetric"), "[q^2 p, p]": star_commutator(q * q * p, p, "symmetric")}
    rhs = {"p*q": p * q + Fraction(1, 2), "q*p": q * p - Fraction(1, 2), "[q^2 p, p]": (q * p).scale(-2)}
    return Outcome([equality("moyal-examples", "star products of generators", ["symmetric"], lhs, rhs, sw)])


# ---------------------------------------------------------------------------
# 3. homological operators
# ---------------------------------------------------------------------------
def _operator_corpus(label: str, alg, names, seed: int) -> list:
    rng = random.Random(seed)
    ids = {name: Corpus() for name in ("b^2", "B^2", "bB+Bb", "cartan")}
    sw = {name: 0.0 for name in ids}
    for i in range(100):
        c = random_chain(rng, alg, names, 4, 3)
        a = random_poly(rng, names, 3, 2)
        s = Stopwatch()
        ids["b^2"].add(b_diff(b_diff(c)).is_zero(), f"chain {i}")
        sw["b^2"] += s.elapsed
        s = Stopwatch()
        ids["B^2"].add(B_diff(B_diff(c)).is_zero(), f"chain {i}")
        sw["B^2"] += s.elapsed
        s = Stopwatch()
        ids["bB+Bb"].add((b_diff(B_diff(c)) + B_diff(b_diff(c))).is_zero(), f"chain {i}")
        sw["bB+Bb"] += s.elapsed
        s = Stopwatch()
        ids["cartan"].add(lie_act(a, c) == b_diff(insert(a, c)) + insert(a, b_diff(c)), f"chain {i}, a = {a}")
        sw["cartan"] += s.elapsed
    anchors = {
        "b^2": "b is a differential",
        "B^2": "B is a differential",
        "bB+Bb": "b and B anticommute",
        "cartan": "Cartan relation [b, i_a] = L_a",
    }
    out = []
    for name, corpus in ids.items():
        rec = corpus.record(f"{name}-{label}", anchors[name], [label, seed], Stopwatch())
        rec.elapsed = sw[name]
        out.append(rec)
    return out


@register("homalg-w1")
def check_homalg_w1(cfg: Config) -> Outcome:
    return Outcome(_operator_corpus("w1", WeylAlgebra(1, cfg.moyal), weyl_names(1), 31))


@register("homalg-xy")
def check_homalg_xy(cfg: Config) -> Outcome:
    return Outcome(_operator_corpus("xy", PolyAlgebra(["x", "y"]), ["x", "y"], 32))


def _shuffle_data(M: int):
    """Fedosov data on the curved Der(K[x,y]) example: ``A`` to q-degree ``M`` and ``∇A + R`` below it."""
    from .io import load_presentation
    from .pbw import PBW, fedosov_A, mc_terms, qtrunc

    pf = load_presentation("derxy_curved")
    pb = PBW(pf.pres, pf.conn)
    r = pb.r
    A = fedosov_A(pb, M + 1)
    F = FormAlgebra(WeylAlgebra(r), r)
    Aform = {(a,): qtrunc(A.symbol(a), r, M) for a in range(r)}
    # symbols of degree M-1 need operator coefficients of degree M (ordering corrections)
    terms = mc_terms(pb, A, M)
    nablaA, curv = {}, {}
    for (a, b), t in terms.items():
        nablaA[(a, b)] = qtrunc(t["nabla_A"].symbol(r), r, M - 1)
        curv[(a, b)] = qtrunc(t["curvature"].symbol(r), r, M - 1)
    return F, r, Aform, nablaA, curv


def _chain_qtrunc(c: Chain, r: int, N: int) -> Chain:
    from .pbw import qtrunc

    out = Chain.zero(c.alg)
    for coeff, uexp, elems in c.tensors():
        ents = [{idx: qtrunc(v, r, N) for idx, v in e.items()} if isinstance(e, dict) else qtrunc(e, r, N) for e in elems]
        out = out + Chain.from_tensor(c.alg, ents, coeff, uexp)
    return out


def _shuffle_samples(F, r, seed: int) -> list:
    rng = random.Random(seed)
    q1, q2, p1, p2 = (Poly.var(v) for v in ("q1", "q2", "p1", "p2"))
    mons = [q1, q2, p1, p2, q1 * p1, q2 * p2 * q1, p1 * p1, Poly.const(1)]

    def entry(deg):
        if deg == 0:
            return rng.choice(mons).scale(rng.randint(1, 3)) + rng.choice(mons)
        return {(rng.randrange(r),): rng.choice(mons) + rng.choice(mons)}

    return [Chain.from_tensor(F, [entry(d) for d in degs]) for degs in ([0, 0], [0, 0, 0], [0, 1], [1, 0, 1], [0, 1, 1])]


def _power(F, Aform, k: int, normalized: bool) -> Chain:
    c = Chain.from_tensor(F, [Poly.const(1)] + [Aform] * k)
    return c.scale(Fraction(1, math.factorial(k))) if normalized else c


@register("shuffle-lemma")
def check_shuffle_lemma(cfg: Config) -> Outcome:
    """The three shuffle-lemma identities for k ≤ 2, literally and with ``(A)^k = 1⊗A^{⊗k}``.

    Identity 1 and 3 are algebraic; identity 2 uses the Maurer–Cartan
    equation, so both of its sides are compared below the truncation of ``A``.
    """
    M = 3
    F, r, Aform, nablaA, curv = _shuffle_data(M)
    samples = _shuffle_samples(F, r, 1)
    out = Outcome()
    readings = (("literal", True), ("unnormalized", False))
    for reading, normalized in readings:
        for k in (0, 1, 2):
            sw = Stopwatch()
            corpus = Corpus()
            Ak = _power(F, Aform, k, normalized)
            for i, a in enumerate(samples):
                lhs = b_diff(shuffle(Ak, a))
                rhs = shuffle(b_diff(Ak), a) + shuffle(Ak, b_diff(a)).scale((-1) ** k)
                if k >= 1:
                    rhs = rhs + shuffle(_power(F, Aform, k - 1, normalized), graded_lie_act(Aform, a, 1)).scale((-1) ** k)
                corpus.add(lhs == rhs, f"sample {i}")
            out.records.append(corpus.record(f"shuffle-b-{reading}-k{k}", f"shuffle lemma, b of a product ({reading} powers of A)", [reading, k, M], sw))
        for k in (0, 1, 2):
            sw = Stopwatch()
            corpus = Corpus()
            Ak = _power(F, Aform, k, normalized)
            for i, a in enumerate(samples):
                corpus.add(B_diff(shuffle(Ak, a)) == shuffle(Ak, B_diff(a)).scale((-1) ** k), f"sample {i}")
            out.records.append(corpus.record(f"shuffle-B-{reading}-k{k}", f"shuffle lemma, B of a product ({reading} powers of A)", [reading, k, M], sw))
    # identity 2: b((A)^k) = ∇((A)^{k-1}) with ∇(1) = 0 and ∇(1⊗A) = 1⊗∇A
    for k in (1, 2):
        sw = Stopwatch()
        lhs = _chain_qtrunc(b_diff(_power(F, Aform, k, True)), r, M - 1)
        rhs = Chain.zero(F) if k == 1 else Chain.from_tensor(F, [Poly.const(1), nablaA])
        out.records.append(record(f"shuffle-bA-literal-k{k}", "shuffle lemma, b of a power of A", ["literal", k, M], repr(lhs), repr(rhs), lhs == rhs, sw))
    sw = Stopwatch()
    lhs = _chain_qtrunc(b_diff(_power(F, Aform, 2, False)), r, M - 1)
    both = {key: nablaA[key] + curv[key] for key in nablaA}
    rhs = Chain.from_tensor(F, [Poly.const(1), both])
    out.records.append(
        record(
            "shuffle-bA-unnormalized-k2",
            "b(1⊗A⊗A) = 1⊗(∇A + R), from the Maurer–Cartan equation",
            ["unnormalized", 2, M],
            repr(lhs),
            repr(rhs),
            lhs == rhs,
            sw,
        )
    )
    return out


# ---------------------------------------------------------------------------
# 4. the fundamental cocycle
# ---------------------------------------------------------------------------
def _w1_monomials(max_degree: int = 3) -> list:
    return monomial_basis(weyl_names(1), max_degree)


def _tuples(monos, slots: int, max_total: int):
    for t in itertools.product(monos, repeat=slots):
        if sum(m.degree() for m in t) <= max_total:
            yield t


@register("cocycle-b")
def check_cocycle_b(cfg: Config) -> Outcome:
    """``τ_2(b c) = 0`` for every monomial 4-slot chain of total degree ≤ 4."""
    sw = Stopwatch()
    W = WeylAlgebra(1, cfg.moyal)
    corpus = Corpus()
    for t in _tuples(_w1_monomials(), 4, 4):
        c = Chain.from_tensor(W, list(t))
        corpus.add(not tau_on_chain(1, b_diff(c)), " | ".join(map(str, t)))
    out = Outcome([corpus.record("cocycle-b", "tau_2 is a Hochschild cocycle", [cfg.moyal], sw)])
    out.adjudications.append(_moyal_cocycle_adjudication(cfg))
    return out


def _moyal_cocycle_adjudication(cfg: Config) -> dict:
    counts = {}
    for conv in sorted(MOYAL_SCALE):
        W = WeylAlgebra(1, conv)
        bad = total = 0
        for t in _tuples(_w1_monomials(), 4, 4):
            total += 1
            bad += bool(tau_on_chain(1, b_diff(Chain.from_tensor(W, list(t)))))
        counts[conv] = {"failing": bad, "total": total}
    return {
        "flag": "moyal-convention",
        "criterion": "tau_2(b c) = 0 on monomial chains",
        "values": counts,
        "satisfied_by": sorted(c for c, v in counts.items() if v["failing"] == 0),
        "selected": cfg.moyal,
    }


@register("cocycle-closed")
def check_cocycle_closed(cfg: Config) -> Outcome:
    """``τ_0(b c) = τ_2(B c)`` on monomial 2-slot chains of degree ≤ 3 per slot."""
    sw = Stopwatch()
    W = WeylAlgebra(1, cfg.moyal)
    corpus = Corpus()
    for t in itertools.product(_w1_monomials(), repeat=2):
        c = Chain.from_tensor(W, list(t))
        corpus.add(not closedness_residue(1, 0, c), " | ".join(map(str, t)))
    return Outcome([corpus.record("cocycle-closed", "cyclic extension is (b + u^-1 B)-closed", [cfg.moyal], sw)])


def _gl1_element(cfg: Config) -> Poly:
    from .weyl import GlPair, embed_gl

    return embed_gl(GlPair.make([[1]], [[0]]), cfg.moyal)[0, 0]


@register("cocycle-invariance")
def check_cocycle_invariance(cfg: Config) -> Outcome:
    """``τ_2(L_X c) = 0`` for the embedded gl_1 generator on 3-slot chains of total degree ≤ 3."""
    sw = Stopwatch()
    W = WeylAlgebra(1, cfg.moyal)
    X = _gl1_element(cfg)
    corpus = Corpus()
    for t in _tuples(_w1_monomials(), 3, 3):
        corpus.add(not tau_on_chain(1, lie_act(X, Chain.from_tensor(W, list(t)))), " | ".join(map(str, t)))
    return Outcome([corpus.record("cocycle-invariance", "L_X tau = 0 for X in gl_1", [cfg.moyal], sw)])


@register("cocycle-basic")
def check_cocycle_basic(cfg: Config) -> Outcome:
    """Basicness for gl_1, read two ways (other slots run over monomials of degree ≤ 3).

    Slotwise: ``τ_2(a, X, b) = τ_2(a, b, X) = 0``.  Contracted: ``τ_2(ι_X(a⊗b)) = 0``,
    the insertion summed over positions with its signs.
    """
    out = Outcome()
    X = _gl1_element(cfg)
    W = WeylAlgebra(1, cfg.moyal)
    monos = _w1_monomials()
    sw = Stopwatch()
    corpus = Corpus()
    for a, b in itertools.product(monos, repeat=2):
        corpus.add(not tau_hoch(1, [a, X, b]), f"{a} | X | {b}")
        corpus.add(not tau_hoch(1, [a, b, X]), f"{a} | {b} | X")
    out.records.append(corpus.record("cocycle-basic-slotwise", "tau vanishes with a gl_1 element in any slot >= 1", [cfg.moyal], sw))
    sw = Stopwatch()
    corpus = Corpus()
    for a, b in itertools.product(monos, repeat=2):
        corpus.add(not tau_on_chain(1, insert(X, Chain.from_tensor(W, [a, b]))), f"{a} | {b}")
    out.records.append(corpus.record("cocycle-basic-contracted", "i_X tau = 0 for X in gl_1", [cfg.moyal], sw))
    return out


def _matrix_units(monos, r: int) -> list:
    out = []
    for m in monos:
        for i in range(r):
            for j in range(r):
                M = [[Poly() for _ in range(r)] for _ in range(r)]
                M[i][j] = m
                out.append(MatrixWeyl(M))
    return out


@register("cocycle-matrix")
def check_cocycle_matrix(cfg: Config) -> Outcome:
    """Matrix extension with r = 2: basic for constant gl_2 matrices, and ``τ^{r}`` on ``c_2 ⊗ 1`` is r."""
    out = Outcome()
    r = 2
    sw = Stopwatch()
    consts = []
    for i in range(r):
        for j in range(r):
            E = [[Fraction(0)] * r for _ in range(r)]
            E[i][j] = Fraction(1)
            consts.append(MatrixWeyl.constant(E))
    args = _matrix_units(_w1_monomials(2), r)
    corpus = Corpus()
    for a, b in itertools.product(args, repeat=2):
        for C in consts:
            corpus.add(not tau_matrix(1, r, [a, C, b]), f"{a} | {C} | {b}")
    out.records.append(corpus.record("cocycle-matrix-basic", "matrix extension is basic for gl_r", [r], sw))
    sw = Stopwatch()
    total = LaurentU()
    for sign, perm in _c2_terms():
        total = total + tau_matrix(1, r, [MatrixWeyl.scalar(f, r) for f in perm]) * sign
    out.records.append(equality("cocycle-matrix-c2", "matrix extension on the identity times c_2", [r], total, LaurentU.scalar(Poly.const(r)), sw))
    return out


def _c2_terms():
    one, p, q = Poly.const(1), Poly.var("p1"), Poly.var("q1")
    return [(1, [one, p, q]), (-1, [one, q, p])]


@register("cycle-c2")
def check_cycle_c2(cfg: Config) -> Outcome:
    """``c_2`` is a Hochschild cycle and is gl_1-invariant."""
    sw = Stopwatch()
    W = WeylAlgebra(1, cfg.moyal)
    c2 = cycle_c2n(W, 1)
    out = Outcome([record("cycle-c2-b", "c_2 is a cycle", [cfg.moyal], repr(b_diff(c2)), "Chain(0)", b_diff(c2).is_zero(), sw)])
    sw = Stopwatch()
    L = lie_act(_gl1_element(cfg), c2)
    out.records.append(record("cycle-c2-invariant", "c_2 is gl_1-invariant", [cfg.moyal], repr(L), "Chain(0)", L.is_zero(), sw))
    return out


# ---------------------------------------------------------------------------
# 5. local Riemann–Roch
# ---------------------------------------------------------------------------
def _lrr_run(r: int, k: int, td: str, moyal_conv: str, w: int) -> Corpus:
    """``ev_1(τ_{2k}^{w,r}) = (−1)^k χ(Td·Ch)_{2k} ⊗ w`` (n = 1) on all basis tuples."""
    n = 1
    P = TdCh(n, r, max(k, 1), td)
    one = MatrixWeyl.scalar(Poly.const(1), r)
    ev = ev1_to_lie(lambda args: tau_matrix(n, r, args, w), 2 * k)
    uexp = w - n + k
    corpus = Corpus()
    if k == 0:
        lhs = ev(one=one)
        zero_A = [[Poly()] * n for _ in range(n)]
        zero_M = [[Poly()] * r for _ in range(r)]
        rhs = LaurentU.scalar(P.component(0, zero_A, zero_M), uexp)
        corpus.add(lhs == rhs, f"k=0: {lhs} vs {rhs}")
        return corpus
    args = _matrix_units(_w1_monomials(), r)
    proj = lambda X: project_gl(X, n)  # noqa: E731
    br = lambda X, Y: X.commutator(Y, moyal_conv)  # noqa: E731
    for X, Y in itertools.combinations(args, 2):
        lhs = ev(X, Y, one=one)
        val = chi(P, 1, [X, Y], lambda a, b: curvature_C(a, b, proj, br))
        rhs = LaurentU.scalar(val.scale(-1), uexp)
        corpus.add(lhs == rhs, f"({X}, {Y})")
    return corpus


@register("local-rr")
def check_local_rr(cfg: Config) -> Outcome:
    out = Outcome()
    w = cfg.w if cfg.w is not None else 0
    for r in (1, 2):
        for k in (0, 1):
            sw = Stopwatch()
            corpus = _lrr_run(r, k, cfg.td, cfg.moyal, w)
            out.records.append(corpus.record(f"local-rr-r{r}-k{k}", "local Riemann-Roch", [r, k, cfg.td, cfg.moyal, w], sw))
    out.adjudications += _lrr_adjudications(cfg, w)
    return out


def _lrr_adjudications(cfg: Config, w: int) -> list:
    td_values = {}
    for td in sorted(TD_CONVENTIONS):
        runs = [_lrr_run(r, k, td, cfg.moyal, w) for r in (1, 2) for k in (0, 1)]
        td_values[td] = {"failing": sum(c.failing for c in runs), "total": sum(c.total for c in runs)}
    moyal_values = {}
    for conv in sorted(MOYAL_SCALE):
        runs = [_lrr_run(r, 1, cfg.td, conv, w) for r in (1, 2)]
        moyal_values[conv] = {"failing": sum(c.failing for c in runs), "total": sum(c.total for c in runs)}
    return [
        {
            "flag": "td-convention",
            "criterion": "local Riemann-Roch, n=1, r in {1,2}, k in {0,1}",
            "values": td_values,
            "satisfied_by": sorted(c for c, v in td_values.items() if v["failing"] == 0),
            "selected": cfg.td,
        },
        {
            "flag": "moyal-convention",
            "criterion": "local Riemann-Roch at k=1 (commutators in the curvature)",
            "values": moyal_values,
            "satisfied_by": sorted(c for c, v in moyal_values.items() if v["failing"] == 0),
            "selected": cfg.moyal,
        },
    ]


@register("td-ch-series")
def check_series(cfg: Config) -> Outcome:
    sw = Stopwatch()
    lhs = {
        "td literal": td_scalar_series(2, "literal"),
        "td calibrated": td_scalar_series(2, "calibrated"),
        "ch": ch_scalar_series(2),
    }
    rhs = {
        "td literal": [Fraction(-1), Fraction(1, 2), Fraction(-1, 12)],
        "td calibrated": [Fraction(1), Fraction(1, 2), Fraction(1, 12)],
        "ch": [Fraction(1), Fraction(1), Fraction(1, 2)],
    }
    lhs = {k: list(v) for k, v in lhs.items()}
    return Outcome([equality("td-ch-series", "Todd and Chern series for gl_1", [], lhs, rhs, sw)])


# ---------------------------------------------------------------------------
# shared inputs for the envelope checks
# ---------------------------------------------------------------------------
def _load(name: str):
    from .io import load_presentation

    return load_presentation(name)


def _conn(pf):
    from .algebroid import Connection

    return pf.conn if pf.conn is not None else Connection.zero(pf.pres.rank, pf.pres.rank)


def _random_jet(rng: random.Random, env, order: int):
    """A jet whose values are small polynomials of degree ≤ 2 in the base variables."""
    from .envelope import JetTable

    names = list(env.pres.variables)

    def value(alpha):
        f = Poly.const(rng.randint(-3, 3))
        for v in names:
            f = f + Poly.var(v).scale(rng.randint(-2, 2))
        if names:
            f = f + Poly.var(names[-1]) ** 2 * rng.randint(0, 1)
        return f

    return JetTable.from_function(env, order, value)


def _pmono_word(word) -> Poly:
    from .pbw import pname

    out = Poly.const(1)
    for b in word:
        out = out * Poly.var(pname(b))
    return out


def _beta(word, r: int) -> tuple:
    return tuple(word.count(a) for a in range(r))


# ---------------------------------------------------------------------------
# 6. the PBW map
# ---------------------------------------------------------------------------
@register("pbw")
def check_pbw(cfg: Config) -> Outcome:
    from .envelope import jet_product
    from .pbw import PBW, _fact, psplit, qsplit, qtrunc, symmetrize

    name = cfg.presentation or "derxy_curved2"
    N = cfg.order or 4
    pf = _load(name)
    conn = _conn(pf)
    pb = PBW(pf.pres, conn)
    env, r = pb.env, pb.r
    rng = random.Random(61)
    base = [name, N]
    out = Outcome()

    sw = Stopwatch()
    mult, inv = Corpus(), Corpus()
    for i in range(3):
        f, g = _random_jet(rng, env, N), _random_jet(rng, env, N)
        mult.add(pb.j(jet_product(f, g), N) == qtrunc(pb.j(f, N) * pb.j(g, N), r, N), f"pair {i}")
        inv.add(pb.j_inverse(pb.j(f, N), N) == f, f"jet {i}")
    out.records.append(mult.record("pbw-multiplicative", "PBW map is an algebra isomorphism", base, sw))
    out.records.append(inv.record("pbw-inverse", "PBW map is invertible", base, Stopwatch()))

    sw = Stopwatch()
    f = _random_jet(rng, env, N)
    jf = pb.j(f, N)
    coeffs = qsplit(jf, r)
    low_lhs = {"1": coeffs.get((0,) * r, Poly())}
    low_rhs = {"1": f(env.one())}
    for a in range(r):
        beta = tuple(int(b == a) for b in range(r))
        low_lhs[f"e{a + 1}"] = coeffs.get(beta, Poly())
        low_rhs[f"e{a + 1}"] = f(env.gen(a))
    out.records.append(equality("pbw-low-orders", "PBW map in orders 0 and 1", base, low_lhs, low_rhs, sw))

    sw = Stopwatch()
    o2_lhs, o2_rhs = {}, {}
    for a in range(r):
        for b in range(a, r):
            beta = _beta([a, b], r)
            X, Y = env.gen(a), env.gen(b)
            nab_ab = env.section([conn.G(a, b, k) for k in range(r)])
            nab_ba = env.section([conn.G(b, a, k) for k in range(r)])
            o2_lhs[f"e{a + 1}e{b + 1}"] = coeffs.get(beta, Poly()) * _fact(beta)
            o2_rhs[f"e{a + 1}e{b + 1}"] = f(X * Y + Y * X - nab_ab - nab_ba).scale(Fraction(1, 2))
    out.records.append(equality("pbw-order2", "second-order term of the PBW map", base, o2_lhs, o2_rhs, sw))

    sw = Stopwatch()
    dual = Corpus()
    for i in range(4):
        alpha = Poly()
        for _ in range(3):
            word = [rng.randrange(r) for _ in range(rng.randint(0, N))]
            alpha = alpha + _pmono_word(word) * random_poly(rng, list(pf.pres.variables) or ["x"], 1, 2)
        if not pf.pres.variables:
            alpha = alpha.subs({"x": Poly.const(1)})
        lhs = f(pb.j_star(alpha))
        rhs = sum((g * coeffs.get(beta, Poly()) * _fact(beta) for beta, g in psplit(alpha, r).items()), Poly())
        dual.add(lhs == rhs, f"alpha {i} = {alpha}")
    out.records.append(dual.record("pbw-duality", "pairing between jets and symmetric tensors", base, sw))

    sw = Stopwatch()
    graded, leading = Corpus(), Corpus()
    for k in range(1, N + 1):
        from .envelope import JetTable

        g = JetTable.from_function(env, N, lambda al, k=k: random_poly(rng, list(pf.pres.variables) or ["x"], 1, 2).subs({"x": Poly.const(1)}) if sum(al) >= k else Poly())
        jg = qsplit(pb.j(g, N), r)
        for word in itertools.combinations_with_replacement(range(r), k):
            beta = _beta(list(word), r)
            sym = symmetrize(env, list(word))
            graded.add(jg.get(beta, Poly()) * _fact(beta) == g(sym), f"k={k} word {word}")
            leading.add((pb.j_star(_pmono_word(word)) - sym).filtration < k, f"word {word}")
    out.records.append(graded.record("pbw-graded", "associated graded of the PBW map is symmetrization", base, sw))
    out.records.append(leading.record("pbw-leading-term", "PBW map has symmetrization as leading term", base, Stopwatch()))

    sw = Stopwatch()
    rec = Corpus()
    for k in range(1, N + 1):
        for word in itertools.combinations_with_replacement(range(r), k):
            word = list(word)
            total = env.zero()
            for i, a in enumerate(word):
                rest = _pmono_word(word[:i] + word[i + 1:])
                total = total + env.gen(a) * pb.j_star(rest) - pb.j_star(pb.nabla_sym(a, rest))
            rec.add(pb.j_star(_pmono_word(word)) == total.scale(Fraction(1, k)), f"word {word}")
    out.records.append(rec.record("pbw-recursion", "recursive formula for the PBW map", base, sw))

    sw = Stopwatch()
    sl = _load("sl2")
    ps = PBW(sl.pres, sl.conn)
    sym = Corpus()
    for d in range(5):
        for word in itertools.combinations_with_replacement(range(3), d):
            sym.add(ps.j_star(_pmono_word(word)) == symmetrize(ps.env, list(word)), f"word {word}")
    out.records.append(sym.record("pbw-sl2-symmetrization", "PBW map of a Lie algebra with the half-bracket connection", ["sl2", 4], sw))

    sw = Stopwatch()
    dx = _load("derx")
    px = PBW(dx.pres, _conn(dx))
    e = px.env.gen(0)
    lhs = {k: px.j_star(_pmono_word([0] * k)) for k in range(N + 1)}
    rhs = {k: normal_power(px.env, e, k) for k in range(N + 1)}
    out.records.append(equality("pbw-flat-derx", "flat connection on Der(K[x]) gives powers of the generator", ["derx", N], {k: str(v) for k, v in lhs.items()}, {k: str(v) for k, v in rhs.items()}, sw))
    return out


def normal_power(env, e, k: int):
    out = env.one()
    for _ in range(k):
        out = out * e
    return out


@register("pbw-ncpbw")
def check_ncpbw(cfg: Config) -> Outcome:
    from .algebroid import Connection
    from .pbw import PBW, ncpbw_residue

    N = cfg.order or 4
    dx = _load("derx")
    x = Poly.var("x")
    rng = random.Random(62)
    out = Outcome()
    for label, conn in (("flat", Connection.zero(1, 1)), ("gamma=x", Connection.make([[[x]]]))):
        sw = Stopwatch()
        pb = PBW(dx.pres, conn)
        env = pb.env
        e, X = env.gen(0), env.scalar(x)
        corpus = Corpus()
        for D, E in ((e, e), (e * e, X * e), (X * e + e * e, e)):
            res = ncpbw_residue(pb, _random_jet(rng, env, 2 * N), D, _random_jet(rng, env, 2 * N), E, N)
            corpus.add(res.is_zero(), f"D={D}, E={E}: residue {res}")
        out.records.append(corpus.record(f"pbw-ncpbw-{label}", "PBW transports the jet product to the fibrewise product", ["derx", label, N], sw))
    return out


@register("pbw-dga")
def check_dga(cfg: Config) -> Outcome:
    from .pbw import PBW, dga_residue

    name = cfg.presentation or "derxy_curved2"
    N = cfg.order or 4
    pf = _load(name)
    pb = PBW(pf.pres, _conn(pf))
    rng = random.Random(63)
    sw = Stopwatch()
    corpus = Corpus()
    for i in range(3):
        for a in range(pb.r):
            res = dga_residue(_random_jet(rng, pb.env, N), _random_jet(rng, pb.env, N), a)
            corpus.add(res.values == {}, f"sample {i}, direction {a + 1}")
    return Outcome([corpus.record("pbw-dga", "flat connection on jets is a derivation of the jet product", [name, N], sw)])


@register("pbw-twisted-module")
def check_twisted_module(cfg: Config) -> Outcome:
    from .envelope import jet_product
    from .pbw import PBW, qtrunc

    N = cfg.order or 4
    rng = random.Random(64)
    out = Outcome()
    for name in ("derx_twisted", "derxy_twisted"):
        sw = Stopwatch()
        pf = _load(name)
        pb = PBW(pf.pres, _conn(pf), pf.econn)
        corpus = Corpus()
        for i in range(2):
            psi = _random_jet(rng, pb.env, N)
            phis = [_random_jet(rng, pb.env, N) for _ in range(pf.s)]
            lhs = pb.jE([jet_product(psi, p) for p in phis], N)
            rhs = [qtrunc(pb.j(psi, N) * v, pb.r, N) for v in pb.jE(phis, N)]
            corpus.add(lhs == rhs, f"sample {i}")
        out.records.append(corpus.record(f"pbw-twisted-{name}", "twisted PBW map is a module map", [name, N], sw))
    return out


# ---------------------------------------------------------------------------
# 7. dependence on the connection
# ---------------------------------------------------------------------------
def _family(cfg: Config):
    from .pbw import PBW

    pf0 = _load(cfg.presentation or "derxy_torsion")
    pf1 = _load(cfg.presentation2 or "derxy_alt")
    c0, c1 = _conn(pf0), _conn(pf1)
    return pf0.pres, c0, c1, PBW(pf0.pres, c0.combine(c1, Poly.var("t")))


@register("depconn")
def check_depconn(cfg: Config) -> Outcome:
    from .pbw import PBW, UElement, exp_derivation, path_ordered_transport, qmono, qtrunc, theta_operator

    N = cfg.order or 4
    pres, c0, c1, pt = _family(cfg)
    r = pt.r
    p0, p1 = PBW(pres, c0), PBW(pres, c1)
    names = [cfg.presentation or "derxy_torsion", cfg.presentation2 or "derxy_alt", N]
    rng = random.Random(71)
    out = Outcome()

    sw = Stopwatch()
    theta = theta_operator(pt, N + 1)
    t_dependent = sorted(v for v, c in theta.vf.items() if c.diff("t"))
    out.records.append(
        record("depconn-theta-constant", "theta does not depend on the family parameter", names, t_dependent, [], not t_dependent, sw,
               "theta = (d/dt j_t) j_t^{-1} is computed along the affine family")
    )

    sw = Stopwatch()
    theta0 = theta.map(lambda c: c.subs({"t": Poly.const(0)}))
    lit = Corpus()
    jets = [_random_jet(rng, p0.env, N) for _ in range(2)]
    for i, f in enumerate(jets):
        lit.add(p1.j(f, N) == exp_derivation(theta0, p0.j(f, N), r, N), f"jet {i}")
    out.records.append(lit.record("depconn-exp-literal", "j_1 = exp(theta) j_0 with a constant theta", names, sw))

    sw = Stopwatch()
    po = Corpus()
    for i, f in enumerate(jets):
        po.add(path_ordered_transport(pt, p0.j(f, N), N) == p1.j(f, N), f"jet {i}")
    out.records.append(po.record("depconn-transport", "j_1 is the path-ordered exponential of theta applied to j_0", names, sw))

    sw = Stopwatch()
    q = [Poly.var(f"q{a + 1}") for a in range(r)]
    a_ = q[0] * q[-1] + Poly.var(pres.variables[0]) * q[-1]
    b_ = q[0] * q[0] + Poly.var(pres.variables[-1])

    def theta_direct(alpha):
        phi = pt.j_inverse(alpha, N)
        total = Poly()
        for d in range(N + 1):
            for beta, u in pt.G(d).items():
                du = UElement(u.env, {k: v.diff("t") for k, v in u.terms.items()})
                total = total + phi(du) * qmono(beta)
        return total

    lhs = theta_direct(qtrunc(a_ * b_, r, N))
    rhs = qtrunc(theta.apply(a_) * b_ + a_ * theta.apply(b_), r, N)
    out.records.append(equality("depconn-derivation", "theta is a derivation", names, lhs, rhs, sw))

    sw = Stopwatch()
    th_same = theta_operator(PBW(pres, c0.combine(c0, Poly.var("t"))), N)
    out.records.append(record("depconn-equal-connections", "theta vanishes for a constant family", names, str(th_same), "0", th_same.is_zero(), sw))
    return out


@register("depconn-fedosov")
def check_depconn_fedosov(cfg: Config) -> Outcome:
    from .algebroid import Connection
    from .pbw import PBW, fedosov_A, nabla_operator, theta_operator

    N = cfg.order or 5
    pres, c0, c1, pt = _family(cfg)
    r = pt.r
    names = [cfg.presentation or "derxy_torsion", cfg.presentation2 or "derxy_alt", N]
    out = Outcome()
    sw = Stopwatch()
    theta = theta_operator(pt, N)
    A = fedosov_A(pt, N)
    ct = c0.combine(c1, Poly.var("t"))
    one_l, one_r, two_l, two_r = {}, {}, {}, {}
    for a in range(r):
        nab = nabla_operator(pres, ct, a)
        F = nab + A.ops[a]
        one_l[a + 1] = str(F.diff("t").truncate(r, N - 1))
        one_r[a + 1] = str(theta.commutator(F).truncate(r, N - 1))
        two_l[a + 1] = str(A.ops[a].diff("t").truncate(r, N - 1))
        two_r[a + 1] = str((theta.commutator(A.ops[a]) - nab.commutator(theta) - nab.diff("t")).truncate(r, N - 1))
    out.records.append(equality("depconn-flat-connection", "d/dt (nabla + A) = [theta, nabla + A]", names, one_l, one_r, sw))
    out.records.append(equality("depconn-fedosov-form", "d/dt A = [theta, A] - nabla theta - d/dt nabla", names, two_l, two_r, Stopwatch()))

    sw = Stopwatch()
    x, y = (Poly.var(v) for v in pres.variables[:2])
    c2 = Connection.from_symbols(pres, {(0, 0, 0): x * y, (1, 1, 0): Poly.const(2)})
    t1, t2 = Poly.var("t1"), Poly.var("t2")

    def g(a, b, c):
        return c0.G(a, b, c) + t1 * (c1.G(a, b, c) - c0.G(a, b, c)) + t2 * (c2.G(a, b, c) - c0.G(a, b, c))

    cs = Connection.make([[[g(a, b, c) for c in range(r)] for b in range(r)] for a in range(r)])
    ps = PBW(pres, cs)
    th1, th2 = theta_operator(ps, N, "t1"), theta_operator(ps, N, "t2")
    lhs = (th2.diff("t1") - th1.diff("t2")).truncate(r, N - 1)
    rhs = th1.commutator(th2).truncate(r, N - 1)
    out.records.append(equality("depconn-two-parameter", "theta is flat over a two-parameter family", names, str(lhs), str(rhs), sw,
                                "both sides vanish on this family" if lhs.is_zero() and rhs.is_zero() else ""))
    return out


# ---------------------------------------------------------------------------
# 8. Fedosov connection
# ---------------------------------------------------------------------------
_FEDOSOV_EXAMPLES = ("derx", "derx_curved", "derxy_curved", "derxy_curved2", "derxy_torsion")


def _p_symbol(a: int, sign: int) -> Poly:
    from .pbw import pname

    return Poly.var(pname(a)).scale(sign)


@register("fedosov")
def check_fedosov(cfg: Config) -> Outcome:
    from .algebroid import is_torsion_free
    from .pbw import PBW, fedosov_A, mc_terms

    N = cfg.order or 4
    out = Outcome()
    forms = {}
    sw = Stopwatch()
    for name in _FEDOSOV_EXAMPLES:
        pf = _load(name)
        pb = PBW(pf.pres, _conn(pf))
        forms[name] = (pf, pb, fedosov_A(pb, N + 1))
    build = sw.elapsed

    sw = Stopwatch()
    lhs = {f"{n}/{a + 1}": A.component(-1, a) for n, (pf, pb, A) in forms.items() for a in range(pb.r)}
    rhs = {f"{n}/{a + 1}": _p_symbol(a, -1) for n, (pf, pb, A) in forms.items() for a in range(pb.r)}
    rec = equality("fedosov-weight-minus-one", "weight -1 part of A is -p_a", list(forms), lhs, rhs, sw)
    rec.elapsed += build
    out.records.append(rec)

    sw = Stopwatch()
    lhs, rhs = {}, {}
    for n, (pf, pb, A) in forms.items():
        if is_torsion_free(_conn(pf), pf.pres):
            for a in range(pb.r):
                lhs[f"{n}/{a + 1}"] = A.component(0, a)
                rhs[f"{n}/{a + 1}"] = Poly()
    out.records.append(equality("fedosov-weight-zero", "A has no weight 0 part for a torsion-free connection", sorted(lhs), lhs, rhs, sw))

    sw = Stopwatch()
    pf, pb, A = forms["derx"]
    out.records.append(equality("fedosov-flat-literal", "flat example: A = +p", ["derx", N], A.symbol(0), _p_symbol(0, 1), sw,
                                "the weight -1 normalization fixes A = -p on the flat example"))
    out.records.append(equality("fedosov-flat", "flat example: A equals its weight -1 part", ["derx", N], A.symbol(0), _p_symbol(0, -1), Stopwatch()))

    sw = Stopwatch()
    mc = Corpus()
    for n, (pf, pb, A) in forms.items():
        for (a, b), t in mc_terms(pb, A, N).items():
            mc.add(t["residue"].is_zero(), f"{n} ({a + 1},{b + 1}): {t['residue']}")
    out.records.append(mc.record("fedosov-maurer-cartan", "R + nabla A + [A, A]/2 = 0", [list(forms), N], sw))
    return out


def _scalar_symbol(sym) -> Poly:
    return sym.entries[0][0] if isinstance(sym, MatrixWeyl) else sym


@register("fedosov-twisted")
def check_fedosov_twisted(cfg: Config) -> Outcome:
    from .algebroid import Connection
    from .pbw import PBW, fedosov_A, mc_terms

    N = cfg.order or 4
    out = Outcome()
    sw = Stopwatch()
    mc = Corpus()
    for name in ("derx_twisted", "derxy_twisted"):
        pf = _load(name)
        pb = PBW(pf.pres, _conn(pf), pf.econn)
        A = fedosov_A(pb, N + 1)
        for (a, b), t in mc_terms(pb, A, N).items():
            mc.add(t["residue"].is_zero(), f"{name} ({a + 1},{b + 1})")
    out.records.append(mc.record("fedosov-twisted-maurer-cartan", "twisted Maurer-Cartan equation, s = 2", ["derx_twisted", "derxy_twisted", N], sw))

    sw = Stopwatch()
    pf = _load("derxy_curved")
    plain = fedosov_A(PBW(pf.pres, pf.conn), N)
    lifted = fedosov_A(PBW(pf.pres, pf.conn, Connection.zero(pf.pres.rank, 1)), N)
    lhs = {a + 1: _scalar_symbol(lifted.symbol(a)) for a in range(pf.pres.rank)}
    rhs = {a + 1: plain.symbol(a) for a in range(pf.pres.rank)}
    out.records.append(equality("fedosov-line-reduction", "s = 1 with the trivial connection reduces to the untwisted form", ["derxy_curved", N], lhs, rhs, sw))

    sw = Stopwatch()
    from .pbw import FirstOrder

    pb = PBW(pf.pres, pf.conn)
    A = fedosov_A(pb, N + 1)
    bent = A.perturb(0, FirstOrder({"q1": Poly.var("q1") * Poly.var("q2")}))
    residues = [t["residue"].is_zero() for t in mc_terms(pb, bent, N).values()]
    out.records.append(record("fedosov-detects-perturbation", "a perturbed form violates the Maurer-Cartan equation", ["derxy_curved", N],
                              {"residues vanish": all(residues)}, {"residues vanish": False}, not all(residues), sw))
    return out


# ---------------------------------------------------------------------------
# 9. the character map
# ---------------------------------------------------------------------------
def _chain(name: str, pres):
    from .io import load_chain

    return load_chain(name, pres).chain


def _renamed(rec: CheckRecord, check: str) -> CheckRecord:
    rec.check = check
    return rec


@register("character-c2")
def check_character_c2(cfg: Config) -> Outcome:
    from .algebroid import LForm
    from .character import CharacterMap, CharacterOutput, _compare

    pf = _load("derx")
    sw = Stopwatch()
    cm = CharacterMap(pf.pres, _conn(pf), None, cfg.w or 0)
    lhs = cm(_chain("c2_derx", pf.pres))
    rhs = CharacterOutput({(0, cfg.w or 0): LForm.function(Poly.const(1))})
    return Outcome([_compare("character-c2", "character of the cycle c2 on the flat line", digest("character-c2", "derx", cfg.w), lhs, rhs, sw)])


_CHAIN_MAP_CASES = (
    ("derx_curved", ("c2_derx", "derx_corpus1", "derx_corpus2", "derx_corpus3")),
    ("derxy_curved", ("one", "derxy_corpus1", "derxy_corpus2", "derxy_corpus3")),
)


@register("character-chain-map")
def check_chain_map(cfg: Config) -> Outcome:
    from .character import CharacterMap, chain_map_check

    out = Outcome()
    cases = _CHAIN_MAP_CASES
    if cfg.presentation:
        cases = ((cfg.presentation, (cfg.chain or "one",)),)
    for pname_, chains in cases:
        pf = _load(pname_)
        cm = CharacterMap(pf.pres, _conn(pf), pf.econn, cfg.w or 0)
        for cname in chains:
            rec = chain_map_check(cm, _chain(cname, pf.pres), f"{pname_}/{cname}")
            out.records.append(_renamed(rec, f"chain-map-{pname_}-{cname}"))
    return out


@register("character-homotopy")
def check_homotopy(cfg: Config) -> Outcome:
    from .character import FamilyCharacterMap, homotopy_check

    out = Outcome()
    cases = (("derx", "derx_x2", ("derx_corpus1", "derx_corpus2")), ("derxy_curved", "derxy_alt", ("derxy_family", "one")))
    if cfg.presentation and cfg.presentation2:
        cases = ((cfg.presentation, cfg.presentation2, (cfg.chain or "one",)),)
    for n0, n1, chains in cases:
        pf0, pf1 = _load(n0), _load(n1)
        fm = FamilyCharacterMap(pf0.pres, (_conn(pf0), None), (_conn(pf1), None))
        for cname in chains:
            rec = homotopy_check(fm, _chain(cname, pf0.pres), f"{n0}->{n1}/{cname}")
            out.records.append(_renamed(rec, f"homotopy-{n0}-{n1}-{cname}"))
    return out


# ---------------------------------------------------------------------------
# 10. index theorem and HKR compatibility
# ---------------------------------------------------------------------------
_INDEX_CASES = ("derxy", "derxy_curved", "derxy_twisted")
_BASE_CHAINS = (("x",), ("x", "y"), ("1", "x", "y"), ("y^2", "x^2", "x*y"), ("x*y", "y"))


def _base_chains(pres) -> list:
    from .scalar import parse_poly

    alg = PolyAlgebra(list(pres.variables))
    out = [(" | ".join(ents), Chain.from_tensor(alg, [parse_poly(e) for e in ents])) for ents in _BASE_CHAINS]
    for name in ("base_xy", "base_deg2"):
        out.append((name, _chain(name, pres)))
    return out


@register("index")
def check_index(cfg: Config) -> Outcome:
    from .character import index_check

    out = Outcome()
    names = (cfg.presentation,) if cfg.presentation else _INDEX_CASES
    for name in names:
        pf = _load(name)
        w = pf.pres.rank if cfg.w is None else cfg.w
        out.records.append(_renamed(index_check(pf.pres, _conn(pf), pf.econn, w, cfg.td, name), f"index-{name}"))
    out.adjudications.append(_index_td_adjudication(cfg))
    return out


def _index_td_adjudication(cfg: Config) -> dict:
    from .character import index_check

    verdict = {}
    for conv in TD_CONVENTIONS:
        failing = 0
        for name in _INDEX_CASES:
            pf = _load(name)
            failing += not index_check(pf.pres, _conn(pf), pf.econn, pf.pres.rank, conv, name).equal
        verdict[conv] = {"failing": failing, "total": len(_INDEX_CASES)}
    return {
        "flag": "td-convention",
        "criterion": "Phi(1) = Td Ch on the index examples",
        "values": verdict,
        "satisfied_by": sorted(c for c, v in verdict.items() if v["failing"] == 0),
        "selected": cfg.td,
    }


@register("hkr")
def check_hkr(cfg: Config) -> Outcome:
    from .character import hkr_compat_check, hkr_mixed_check

    out = Outcome()
    names = (cfg.presentation,) if cfg.presentation else _INDEX_CASES
    sw = Stopwatch()
    mixed = Corpus()
    pres0 = _load(names[0]).pres
    for label, chain in _base_chains(pres0):
        rec = hkr_mixed_check(chain, pres0, label)
        mixed.add(rec.equal, label)
    out.records.append(mixed.record("hkr-mixed", "HKR is a map of mixed complexes", [names[0]], sw))
    for name in names:
        pf = _load(name)
        w = pf.pres.rank if cfg.w is None else cfg.w
        sw = Stopwatch()
        compat = Corpus()
        for label, chain in _base_chains(pf.pres):
            rec = hkr_compat_check(pf.pres, _conn(pf), chain, pf.econn, w, cfg.td, label)
            compat.add(rec.equal, f"{label}: {rec.lhs} vs {rec.rhs}")
        out.records.append(compat.record(f"hkr-compat-{name}", "character map restricted to functions is HKR times Td Ch", [name, w, cfg.td], sw))
    return out


@register("u-positivity")
def check_u_positivity(cfg: Config) -> Outcome:
    from .character import CharacterMap, u_positivity_check

    out = Outcome()
    for name, chains in (("derxy_curved", ("one", "derxy_corpus3", "derxy_family")), ("derxy_twisted", ("one", "derxy_corpus3"))):
        pf = _load(name)
        w = pf.pres.rank if cfg.w is None else cfg.w
        cm = CharacterMap(pf.pres, _conn(pf), pf.econn, w)
        for cname in chains:
            chain = _chain(cname, pf.pres).truncate(cfg.u_kind)
            out.records.append(_renamed(u_positivity_check(cm, chain, f"{name}/{cname}"), f"u-positivity-{name}-{cname}"))
    return out


# ---------------------------------------------------------------------------
# 11. Chern-Weil forms and the validator
# ---------------------------------------------------------------------------
def _sl2_twist(pres):
    from .algebroid import Connection

    return Connection.from_symbols(pres, {(0, 0, 1): 1, (1, 1, 0): 1, (2, 0, 0): 1}, 2)


@register("chern-weil-closed")
def check_cw_closed(cfg: Config) -> Outcome:
    from .algebroid import ce_diff
    from .chernweil import algebroid_cw

    out = Outcome()
    sw = Stopwatch()
    pf = _load("derxyz_curved")
    sl = _load("sl2")
    cases = (("derxyz_curved", pf.pres, pf.conn, pf.econn), ("sl2", sl.pres, sl.conn, _sl2_twist(sl.pres)))
    lhs, rhs, forms = {}, {}, {}
    for name, pres, conn, econn in cases:
        P = TdCh(pres.rank, econn.module_rank, 2, cfg.td)
        for k in (1,):
            form = algebroid_cw(pres, conn, econn, P, k)
            forms[f"{name}/{2 * k}"] = {str(i): str(v[0]) for i, v in sorted(form.coeffs.items())}
            d = ce_diff(form, pres)
            lhs[f"{name}/{2 * k}"] = {str(i): str(v[0]) for i, v in sorted(d.coeffs.items())}
            rhs[f"{name}/{2 * k}"] = {}
    nontrivial = all(forms.values())
    out.records.append(record("chern-weil-closed", "Chern-Weil forms are closed", ["derxyz_curved", "sl2", cfg.td], lhs, rhs, lhs == rhs and nontrivial, sw,
                              "" if nontrivial else "a Chern-Weil form vanished identically, so the check is vacuous"))
    return out


@register("chern-weil-transgression")
def check_transgression(cfg: Config) -> Outcome:
    from .algebroid import Connection, ce_diff
    from .chernweil import algebroid_cw, transgression

    out = Outcome()
    pf = _load("derxy")
    pres = pf.pres
    x, y = Poly.var("x"), Poly.var("y")
    L0 = Connection.from_symbols(pres, {(0, 0, 0): y})
    L1 = Connection.from_symbols(pres, {(0, 1, 1): x * y, (1, 0, 1): x, (1, 1, 0): y * y})
    E0 = Connection.from_symbols(pres, {}, 2)
    E1 = Connection.from_symbols(pres, {(0, 0, 1): y, (1, 1, 0): x * x, (0, 1, 1): x}, 2)
    z = _load("derxyz_curved")
    Z1 = Connection.from_symbols(z.pres, {(0, 1, 0): Poly.var("z"), (2, 1, 1): x}, 2)
    cases = (("derxy", pres, (L0, E0), (L1, E1)), ("derxyz_curved", z.pres, (z.conn, z.econn), (Connection.zero(3, 3), Z1)))
    for name, pr, pair0, pair1 in cases:
        sw = Stopwatch()
        P = TdCh(pr.rank, 2, 2, cfg.td)
        T = transgression(pr, pair0, pair1, P, 1)
        lhs = ce_diff(T, pr)
        rhs = algebroid_cw(pr, *pair1, P, 1) - algebroid_cw(pr, *pair0, P, 1)
        as_text = lambda f: {str(i): str(v[0]) for i, v in sorted(f.coeffs.items()) if not v[0].is_zero()}
        out.records.append(record(f"chern-weil-transgression-{name}", "d of the transgression form is the difference of Chern-Weil forms", [name, cfg.td],
                                  as_text(lhs), as_text(rhs), (lhs - rhs).is_zero(), sw))
    return out


@register("validator")
def check_validator(cfg: Config) -> Outcome:
    from .algebroid import validate
    from .io import bundled_names

    sw = Stopwatch()
    lhs, rhs = {}, {}
    for fname in bundled_names(".pres"):
        name = fname.removesuffix(".pres")
        lhs[name] = validate(_load(name).pres).valid
        rhs[name] = not name.startswith("broken_")
    return Outcome([equality("validator", "validator accepts exactly the Lie algebroids", sorted(lhs), lhs, rhs, sw)])


@register("mc")
def check_mc(cfg: Config) -> Outcome:
    """Maurer-Cartan residue for one presentation (the flat plane by default)."""
    from .pbw import PBW, fedosov_A, mc_terms

    name = cfg.presentation or "derxy"
    N = cfg.order or 4
    pf = _load(name)
    sw = Stopwatch()
    pb = PBW(pf.pres, _conn(pf), pf.econn)
    terms = mc_terms(pb, fedosov_A(pb, N + 1), N)
    lhs = {f"{a + 1},{b + 1}": str(t["residue"]) for (a, b), t in terms.items()}
    rhs = {k: "0" for k in lhs}
    return Outcome([record("mc", "Maurer-Cartan equation for the Fedosov form", [name, N], lhs, rhs, all(t["residue"].is_zero() for t in terms.values()), sw)])
