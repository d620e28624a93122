"""Free Lie–Rinehart algebras over polynomial rings.

A presentation fixes base coordinates ``x¹..x^m``, a frame ``e_1..e_r``, the
anchor matrix ``ρ(e_i) = Σ_j ρ_ij ∂/∂x^j`` and structure functions
``[e_i, e_j] = Σ_k c_ij^k e_k``.  Sections are coefficient tuples on the frame.
Connections on free modules are stored through Christoffel symbols
``∇_{e_i} f_b = Σ_k Γ[i][b][k] f_k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .scalar import Poly, parse_poly


class PresentationError(ValueError):
    pass


class SplittingError(ValueError):
    pass


def _P(x) -> Poly:
    return Poly.coerce(x)


@dataclass(frozen=True)
class Presentation:
    """Free Lie–Rinehart datum ``(𝕂[x], R^r, ρ, c)``."""

    variables: tuple
    rank: int
    anchor: tuple  # rank × m tuple of Poly
    structure: dict = field(hash=False)  # (i, j, k) 0-based → Poly, stored for i < j
    name: str = ""

    @classmethod
    def make(cls, variables, rank, anchor, structure=None, name="") -> "Presentation":
        variables = tuple(variables)
        anchor = tuple(tuple(_P(a) for a in row) for row in anchor)
        if len(anchor) != rank or any(len(row) != len(variables) for row in anchor):
            raise PresentationError("anchor must be rank × m")
        st: dict = {}
        given = {key: _P(v) for key, v in (structure or {}).items()}
        for (i, j, k), v in given.items():
            if v:
                st[(i, j, k)] = v
            # a one-sided entry implies its antisymmetric partner
            if (j, i, k) not in given and i != j and v:
                st[(j, i, k)] = -v
        return cls(variables, rank, anchor, st, name)

    @property
    def m(self) -> int:
        return len(self.variables)

    # -- raw structure ------------------------------------------------
    def c(self, i: int, j: int, k: int) -> Poly:
        """Structure function ``c_ij^k`` as stored (antisymmetry is checked, not imposed)."""
        return self.structure.get((i, j, k), Poly())

    def anchor_apply(self, i: int, f: Poly) -> Poly:
        """``ρ(e_i)(f)``."""
        f = _P(f)
        out = Poly()
        for j, v in enumerate(self.variables):
            if self.anchor[i][j]:
                out = out + self.anchor[i][j] * f.diff(v)
        return out

    def rho(self, X: Sequence[Poly], f: Poly) -> Poly:
        """Anchor of a general section applied to a function."""
        return sum((_P(X[i]) * self.anchor_apply(i, f) for i in range(self.rank) if X[i]), Poly())

    def frame(self, i: int) -> tuple:
        return tuple(Poly.const(1 if k == i else 0) for k in range(self.rank))

    def bracket(self, X: Sequence[Poly], Y: Sequence[Poly]) -> tuple:
        """``[X, Y]`` for sections given by frame coefficients."""
        r = self.rank
        out = [Poly() for _ in range(r)]
        for i in range(r):
            if not X[i]:
                continue
            for j in range(r):
                if not Y[j]:
                    continue
                for k in range(r):
                    cij = self.c(i, j, k)
                    if cij:
                        out[k] = out[k] + _P(X[i]) * _P(Y[j]) * cij
        for k in range(r):
            out[k] = out[k] + self.rho(X, _P(Y[k])) - self.rho(Y, _P(X[k]))
        return tuple(out)

    def bracket_frame(self, i: int, j: int) -> tuple:
        return tuple(self.c(i, j, k) for k in range(self.rank))

    def bracket_constants(self, i: int, j: int) -> tuple:
        """``[e_i, e_j]`` using antisymmetric completion of the stored data."""
        return self.bracket(self.frame(i), self.frame(j))

    def vector_field(self, X: Sequence[Poly]) -> tuple:
        """``ρ(X)`` as coefficients on ``∂/∂x^j``."""
        return tuple(
            sum((_P(X[i]) * self.anchor[i][j] for i in range(self.rank)), Poly()) for j in range(self.m)
        )


def vf_bracket(pres: Presentation, U: Sequence[Poly], V: Sequence[Poly]) -> tuple:
    """Commutator of vector fields given by coefficients on ``∂/∂x^j``."""
    out = []
    for j in range(pres.m):
        s = Poly()
        for l, v in enumerate(pres.variables):
            s = s + U[l] * V[j].diff(v) - V[l] * U[j].diff(v)
        out.append(s)
    return tuple(out)


@dataclass
class ValidationReport:
    valid: bool
    failures: list

    def __bool__(self):
        return self.valid


def validate(pres: Presentation, samples: Sequence[Poly] | None = None) -> ValidationReport:
    """Check antisymmetry, the anchor morphism property, Jacobi and Leibniz identities."""
    r = pres.rank
    fails = []
    for i in range(r):
        for j in range(r):
            for k in range(r):
                if pres.c(i, j, k) + pres.c(j, i, k):
                    fails.append(("antisymmetry", (i + 1, j + 1, k + 1), str(pres.c(i, j, k) + pres.c(j, i, k))))
    for i in range(r):
        for j in range(r):
            lhs = pres.vector_field(pres.bracket_frame(i, j))
            rhs = vf_bracket(pres, pres.vector_field(pres.frame(i)), pres.vector_field(pres.frame(j)))
            if lhs != rhs:
                fails.append(("anchor", (i + 1, j + 1), str([str(a - b) for a, b in zip(lhs, rhs)])))
    for i, j, k in itertools.combinations_with_replacement(range(r), 3):
        for a, b, c in {(i, j, k), (i, k, j)}:
            E = [pres.frame(t) for t in range(r)]
            total = [Poly() for _ in range(r)]
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                t = pres.bracket(pres.bracket(E[x], E[y]), E[z])
                total = [u + v for u, v in zip(total, t)]
            if any(total):
                fails.append(("jacobi", (a + 1, b + 1, c + 1), str([str(t) for t in total])))
    funcs = list(samples) if samples is not None else [Poly.var(v) for v in pres.variables] + [
        Poly.var(v) ** 2 for v in pres.variables
    ]
    for i, j in itertools.product(range(r), repeat=2):
        X, Y = pres.frame(i), pres.frame(j)
        for f in funcs:
            lhs = pres.bracket(X, tuple(f * y for y in Y))
            br = pres.bracket(X, Y)
            rf = pres.anchor_apply(i, f)
            rhs = tuple(f * b + rf * y for b, y in zip(br, Y))
            if lhs != rhs:
                fails.append(("leibniz", (i + 1, j + 1, str(f)), ""))
    return ValidationReport(not fails, fails)


# ---------------------------------------------------------------------------
# Connections
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Connection:
    """Connection on a free module of rank ``module_rank``: ``∇_{e_i} f_b = Σ_k gamma[i][b][k] f_k``."""

    gamma: tuple
    module_rank: int

    @classmethod
    def make(cls, gamma, module_rank: int | None = None) -> "Connection":
        g = tuple(tuple(tuple(_P(x) for x in row) for row in block) for block in gamma)
        s = module_rank if module_rank is not None else (len(g[0]) if g else 0)
        return cls(g, s)

    @classmethod
    def zero(cls, frame_rank: int, module_rank: int) -> "Connection":
        return cls.make([[[0] * module_rank for _ in range(module_rank)] for _ in range(frame_rank)], module_rank)

    @classmethod
    def from_symbols(cls, pres: Presentation, symbols: dict, module_rank: int | None = None) -> "Connection":
        """From a sparse dict ``{(i, b, k): poly}`` (0-based)."""
        s = module_rank if module_rank is not None else pres.rank
        g = [[[Poly() for _ in range(s)] for _ in range(s)] for _ in range(pres.rank)]
        for (i, b, k), v in symbols.items():
            g[i][b][k] = _P(v)
        return cls.make(g, s)

    def G(self, i: int, b: int, k: int) -> Poly:
        return self.gamma[i][b][k]

    def matrix(self, i: int) -> list:
        """Connection matrix of ``e_i`` acting on coefficient vectors: ``(∇_i m)^k = ρ_i(m^k) + Σ_b m^b Γ[i][b][k]``."""
        s = self.module_rank
        return [[self.gamma[i][b][k] for b in range(s)] for k in range(s)]

    def covariant(self, pres: Presentation, X: Sequence[Poly], m: Sequence[Poly]) -> tuple:
        """``∇_X m`` for a section ``X`` of L and ``m`` of the module."""
        s = self.module_rank
        out = [Poly() for _ in range(s)]
        for i in range(pres.rank):
            if not X[i]:
                continue
            for k in range(s):
                acc = pres.anchor_apply(i, _P(m[k]))
                for b in range(s):
                    if m[b] and self.gamma[i][b][k]:
                        acc = acc + _P(m[b]) * self.gamma[i][b][k]
                out[k] = out[k] + _P(X[i]) * acc
        return tuple(out)

    def combine(self, other: "Connection", t: Poly) -> "Connection":
        """Affine combination ``(1−t)·self + t·other``."""
        t = _P(t)
        one = Poly.const(1) - t
        return Connection.make(
            [
                [[one * a + t * b for a, b in zip(r1, r2)] for r1, r2 in zip(b1, b2)]
                for b1, b2 in zip(self.gamma, other.gamma)
            ],
            self.module_rank,
        )

    def map_coeffs(self, f: Callable[[Poly], Poly]) -> "Connection":
        return Connection.make([[[f(x) for x in row] for row in blk] for blk in self.gamma], self.module_rank)


def curvature(conn: Connection, pres: Presentation) -> dict:
    """``R(e_i,e_j)`` as a matrix ``R[(i,j)][k][b]`` with ``R(e_i,e_j) f_b = Σ_k R[k][b] f_k``; i < j only."""
    s = conn.module_rank
    out = {}
    for i, j in itertools.combinations(range(pres.rank), 2):
        M = [[Poly() for _ in range(s)] for _ in range(s)]
        for b in range(s):
            fb = tuple(Poly.const(1 if t == b else 0) for t in range(s))
            a = conn.covariant(pres, pres.frame(i), conn.covariant(pres, pres.frame(j), fb))
            c = conn.covariant(pres, pres.frame(j), conn.covariant(pres, pres.frame(i), fb))
            d = conn.covariant(pres, pres.bracket_frame(i, j), fb)
            for k in range(s):
                M[k][b] = a[k] - c[k] - d[k]
        out[(i, j)] = M
    return out


def torsion(conn: Connection, pres: Presentation) -> dict:
    """``T(e_i,e_j) = ∇_{e_i}e_j − ∇_{e_j}e_i − [e_i,e_j]`` as frame coefficients, i < j."""
    if conn.module_rank != pres.rank:
        raise PresentationError("torsion needs an L-connection")
    out = {}
    for i, j in itertools.combinations(range(pres.rank), 2):
        a = conn.covariant(pres, pres.frame(i), pres.frame(j))
        b = conn.covariant(pres, pres.frame(j), pres.frame(i))
        c = pres.bracket_frame(i, j)
        out[(i, j)] = tuple(x - y - z for x, y, z in zip(a, b, c))
    return out


def is_flat(conn: Connection, pres: Presentation) -> bool:
    return all(not x for M in curvature(conn, pres).values() for row in M for x in row)


def is_torsion_free(conn: Connection, pres: Presentation) -> bool:
    return all(not x for v in torsion(conn, pres).values() for x in v)


def connection_from_splitting(pres: Presentation, splitting=None, module_rank: int | None = None) -> Connection:
    """``∇_X(m) = X(s(m)_{(1)}) s(m)_{(2)}`` for an R-linear ``s: M → R ⊗_𝕂 M``.

    ``splitting[b]`` lists pairs ``(r, m)`` with ``s(f_b) = Σ r ⊗ m``, where ``m`` is a coefficient
    vector.  ``None`` selects the tautological ``s(f_b) = 1 ⊗ f_b``.
    """
    s = module_rank if module_rank is not None else pres.rank
    if splitting is None:
        return Connection.zero(pres.rank, s)
    for b in range(s):
        total = [Poly() for _ in range(s)]
        for r_, m in splitting[b]:
            total = [t + _P(r_) * _P(x) for t, x in zip(total, m)]
        if total != [Poly.const(1 if k == b else 0) for k in range(s)]:
            raise SplittingError(f"s(f_{b + 1}) does not project to f_{b + 1}")
    gamma = [[[Poly() for _ in range(s)] for _ in range(s)] for _ in range(pres.rank)]
    for i in range(pres.rank):
        for b in range(s):
            for r_, m in splitting[b]:
                d = pres.anchor_apply(i, _P(r_))
                if d:
                    for k in range(s):
                        gamma[i][b][k] = gamma[i][b][k] + d * _P(m[k])
    return Connection.make(gamma, s)


# ---------------------------------------------------------------------------
# Forms and the Chevalley–Eilenberg differential
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LForm:
    """Alternating p-form on the frame with values in a free module of rank ``vrank``.

    ``coeffs`` maps strictly increasing index tuples to coefficient tuples (length ``vrank``);
    scalar forms use ``vrank = 1``.
    """

    degree: int
    coeffs: dict = field(hash=False)
    vrank: int = 1

    @classmethod
    def make(cls, degree: int, coeffs: dict, vrank: int = 1) -> "LForm":
        clean = {}
        for idx, v in coeffs.items():
            v = tuple(_P(x) for x in (v if isinstance(v, (tuple, list)) else (v,)))
            if len(idx) != degree or list(idx) != sorted(set(idx)):
                raise ValueError("form indices must be strictly increasing of length = degree")
            if any(v):
                clean[tuple(idx)] = v
        return cls(degree, clean, vrank)

    @classmethod
    def function(cls, f) -> "LForm":
        return cls.make(0, {(): (f,)})

    def value(self, idx: Sequence[int]) -> tuple:
        """Evaluate on frame elements in any order (alternating)."""
        if len(set(idx)) < len(idx):
            return tuple(Poly() for _ in range(self.vrank))
        order = sorted(range(len(idx)), key=lambda a: idx[a])
        inv = sum(1 for a, b in itertools.combinations(range(len(order)), 2) if order[a] > order[b])
        v = self.coeffs.get(tuple(sorted(idx)))
        if v is None:
            return tuple(Poly() for _ in range(self.vrank))
        return tuple(x.scale(-1) for x in v) if inv % 2 else v

    def __add__(self, other):
        keys = set(self.coeffs) | set(other.coeffs)
        z = tuple(Poly() for _ in range(self.vrank))
        return LForm.make(
            self.degree,
            {k: tuple(a + b for a, b in zip(self.coeffs.get(k, z), other.coeffs.get(k, z))) for k in keys},
            self.vrank,
        )

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "LForm":
        c = _P(c)
        return LForm.make(self.degree, {k: tuple(x * c for x in v) for k, v in self.coeffs.items()}, self.vrank)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, LForm) and (self.degree, self.vrank, self.coeffs) == (
            other.degree,
            other.vrank,
            other.coeffs,
        )

    def wedge(self, other: "LForm") -> "LForm":
        """Wedge of scalar forms."""
        from .algebras import wedge_indices

        out: dict = {}
        for i1, v1 in self.coeffs.items():
            for i2, v2 in other.coeffs.items():
                sgn, idx = wedge_indices(i1, i2)
                if sgn:
                    out[idx] = out.get(idx, Poly()) + (v1[0] * v2[0]).scale(sgn)
        return LForm.make(self.degree + other.degree, {k: (v,) for k, v in out.items()})


def ce_diff(form: LForm, pres: Presentation, conn: Connection | None = None) -> LForm:
    """Koszul differential with coefficients in the module carrying ``conn`` (trivial module if None)."""
    p = form.degree
    r = pres.rank
    if p + 1 > r:
        return LForm.make(p + 1, {}, form.vrank)
    if conn is not None and conn.module_rank != form.vrank:
        raise ValueError("connection rank does not match form values")
    out = {}
    for idx in itertools.combinations(range(r), p + 1):
        total = [Poly() for _ in range(form.vrank)]
        for a in range(p + 1):
            rest = idx[:a] + idx[a + 1 :]
            val = form.value(rest)
            if conn is None:
                acted = tuple(pres.anchor_apply(idx[a], v) for v in val)
            else:
                acted = conn.covariant(pres, pres.frame(idx[a]), val)
            sign = -1 if a % 2 else 1
            total = [t + x.scale(sign) for t, x in zip(total, acted)]
        for a, b in itertools.combinations(range(p + 1), 2):
            br = pres.bracket_frame(idx[a], idx[b])
            rest = idx[:a] + idx[a + 1 : b] + idx[b + 1 :]
            sign = -1 if (a + b) % 2 else 1
            for k in range(r):
                if br[k]:
                    val = form.value((k,) + rest)
                    total = [t + (x * br[k]).scale(sign) for t, x in zip(total, val)]
        out[idx] = tuple(total)
    return LForm.make(p + 1, out, form.vrank)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PresentationFile:
    """Parsed presentation file: the algebroid, an optional L-connection and an optional E-connection."""

    pres: Presentation
    conn: Connection | None
    s: int
    econn: Connection | None


def parse_presentation(text: str) -> PresentationFile:
    """Parse the key–value presentation format (see README for the grammar)."""
    m = r = None
    s = 0
    names = None
    anchor_rows = []
    structure: dict = {}
    gam: dict = {}
    egam: dict = {}
    title = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "name":
                title = rest
            elif head == "m":
                m = int(rest)
            elif head == "r":
                r = int(rest)
            elif head == "s":
                s = int(rest)
            elif head == "vars":
                names = rest.split()
            elif head == "anchor":
                anchor_rows.append([parse_poly(t) for t in _split_cells(rest)])
            elif head in ("c", "G", "E"):
                lhs, _, rhs = rest.partition("=")
                idx = tuple(int(t) - 1 for t in lhs.split())
                if len(idx) != 3 or not rhs.strip():
                    raise PresentationError("expected three indices and '= <poly>'")
                target = {"c": structure, "G": gam, "E": egam}[head]
                target[idx] = parse_poly(rhs)
            else:
                raise PresentationError(f"unknown key {head!r}")
        except (SyntaxError, ValueError) as exc:
            raise PresentationError(f"line {lineno}: {exc}") from exc
    if m is None or r is None:
        raise PresentationError("header must declare m and r")
    if names is None:
        names = ["x"] if m == 1 else [f"x{i}" for i in range(1, m + 1)]
    if len(names) != m:
        raise PresentationError("vars line does not match m")
    if len(anchor_rows) != r:
        raise PresentationError(f"expected {r} anchor rows, found {len(anchor_rows)}")
    pres = Presentation.make(names, r, anchor_rows, structure, title)
    conn = Connection.from_symbols(pres, gam) if gam else None
    econn = Connection.from_symbols(pres, egam, s) if egam else None
    return PresentationFile(pres, conn, s, econn)


def _split_cells(rest: str) -> list:
    """Anchor cells are separated by ';' (or whitespace when every cell is a single token)."""
    if ";" in rest:
        return [c.strip() for c in rest.split(";")]
    return rest.split()


def serialize_presentation(pf: PresentationFile) -> str:
    """Canonical text; ``parse_presentation(serialize_presentation(x))`` reproduces ``x``."""
    pres = pf.pres
    lines = []
    if pres.name:
        lines.append(f"name {pres.name}")
    lines += [f"m {pres.m}", f"r {pres.rank}", f"s {pf.s}", "vars " + " ".join(pres.variables)]
    for row in pres.anchor:
        lines.append("anchor " + " ; ".join(str(a) for a in row) if pres.m else "anchor")
    for (i, j, k) in sorted(pres.structure):
        lines.append(f"c {i + 1} {j + 1} {k + 1} = {pres.structure[(i, j, k)]}")
    for tag, conn in (("G", pf.conn), ("E", pf.econn)):
        if conn is None:
            continue
        for i, blk in enumerate(conn.gamma):
            for b, row in enumerate(blk):
                for k, v in enumerate(row):
                    if v:
                        lines.append(f"{tag} {i + 1} {b + 1} {k + 1} = {v}")
    return "\n".join(lines) + "\n"
