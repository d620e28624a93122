"""Text formats: presentations, chains and bundled example data.

Chain files look like::

    # comment
    algebra U                 # U, base, or "weyl <n> [literal|symmetric]"
    term u^0 : 1 | x | e1
    term u^1 -1/2 : x*e1^2 | y

Each ``term`` line carries the u-exponent, an optional coefficient (a
polynomial, default 1) and the tensor slots separated by ``|``.  Slots of a
``U`` chain are written in the generators ``e1 … er`` and the base variables;
products are normal ordered on input, so ``e1*x`` is read as ``x*e1 + ρ_1(x)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .algebras import Algebra, PolyAlgebra, WeylAlgebra
from .algebroid import PresentationError, PresentationFile, parse_presentation, serialize_presentation
from .envelope import Envelope, UElement, format_multi_index
from .homalg import Chain
from .scalar import Poly, _Parser, parse_poly

__all__ = [
    "ChainFormatError",
    "ChainFile",
    "parse_u_expr",
    "format_u",
    "parse_chain",
    "serialize_chain",
    "load_presentation",
    "load_chain",
    "roundtrip_presentation",
    "data_file",
    "bundled_names",
]


class ChainFormatError(ValueError):
    pass


_GEN = re.compile(r"^e(\d+)$")


def parse_u_expr(text: str, env: Envelope) -> UElement:
    """Read an element of ``U`` written with ``e1 … er`` and base variables."""
    names = set(env.pres.variables)

    def name(v: str) -> UElement:
        m = _GEN.match(v)
        if m and v not in names:
            i = int(m.group(1)) - 1
            if not 0 <= i < env.r:
                raise ChainFormatError(f"generator {v} out of range for rank {env.r}")
            return env.gen(i)
        return env.scalar(Poly.var(v))

    return _Parser(text, name=name, const=lambda c: env.scalar(Poly.const(c))).parse()


def format_u(u: UElement) -> str:
    """Readable text accepted by :func:`parse_u_expr`, e.g. ``x*e1^2 - 1/2*e2 + y``."""
    pieces = []
    for alpha in sorted(u.terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
        f = u.terms[alpha]
        mono = format_multi_index(alpha)
        neg = len(f.terms) == 1 and next(iter(f.terms.values())) < 0
        g = -f if neg else f
        if mono == "1":
            body = str(g)
        elif g == Poly.const(1):
            body = mono
        elif len(g.terms) == 1:
            body = f"{g}*{mono}"
        else:
            body = f"({g})*{mono}"
        pieces.append(("-" if neg else "+", body))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


@dataclass
class ChainFile:
    """A parsed chain file; ``kind`` is ``U``, ``base`` or ``weyl``."""

    kind: str
    chain: Chain
    n: int = 0
    convention: str = "symmetric"


def _algebra_for(kind: str, pres, n: int, convention: str) -> tuple[Algebra, object]:
    if kind == "U":
        if pres is None:
            raise ChainFormatError("a U chain needs a presentation")
        from .character import UAlgebra

        env = Envelope(pres)
        return UAlgebra(env), lambda s: parse_u_expr(s, env)
    if kind == "base":
        if pres is None:
            raise ChainFormatError("a base chain needs a presentation")
        return PolyAlgebra(list(pres.variables)), parse_poly
    if kind == "weyl":
        return WeylAlgebra(n, convention), parse_poly
    raise ChainFormatError(f"unknown algebra {kind!r}")


_UEXP = re.compile(r"^u\^(-?\d+)$")


def parse_chain(text: str, pres=None) -> ChainFile:
    kind, n, convention = None, 0, "symmetric"
    alg = reader = None
    chain = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "algebra":
                if kind is not None:
                    raise ChainFormatError("algebra declared twice")
                words = rest.split()
                if not words:
                    raise ChainFormatError("algebra line needs a kind")
                kind = words[0]
                if kind == "weyl":
                    n = int(words[1])
                    if len(words) > 2:
                        convention = words[2]
                alg, reader = _algebra_for(kind, pres, n, convention)
                chain = Chain.zero(alg)
            elif head == "term":
                if alg is None:
                    raise ChainFormatError("term before the algebra line")
                left, sep, slots = rest.partition(":")
                if not sep:
                    raise ChainFormatError("term needs ':' before the slots")
                words = left.split(None, 1)
                m = _UEXP.match(words[0]) if words else None
                if not m:
                    raise ChainFormatError("term must start with u^k")
                coeff = parse_poly(words[1]) if len(words) > 1 else Poly.const(1)
                entries = [reader(s) for s in slots.split("|")]
                chain = chain + Chain.from_tensor(alg, entries, coeff, int(m.group(1)))
            else:
                raise ChainFormatError(f"unknown key {head!r}")
        except (SyntaxError, ValueError, IndexError) as exc:
            raise ChainFormatError(f"line {lineno}: {exc}") from exc
    if chain is None:
        raise ChainFormatError("missing algebra line")
    return ChainFile(kind, chain, n, convention)


def serialize_chain(cf: ChainFile) -> str:
    """Canonical text; parsing it gives back an equal chain."""
    head = cf.kind if cf.kind != "weyl" else f"weyl {cf.n} {cf.convention}"
    alg = cf.chain.alg
    rows = []
    for key, c in cf.chain.terms.items():
        show = format_u if cf.kind == "U" else str
        slots = [show(alg.assemble({k: Poly.const(1)})) for k in key[1:]]
        coeff = "" if c == Poly.const(1) else f" {c}"
        rows.append(f"term u^{key[0]}{coeff} : " + " | ".join(slots))
    rows.sort(key=lambda r: (r.count("|"), r))
    return "\n".join([f"algebra {head}"] + rows) + "\n"


# ---------------------------------------------------------------------------
# bundled data
# ---------------------------------------------------------------------------
def data_file(name: str):
    """Path-like handle of a bundled file, e.g. ``data_file("derx.pres")``."""
    return resources.files("algebroid_index").joinpath("data", name)


def bundled_names(suffix: str = "") -> list:
    return sorted(p.name for p in resources.files("algebroid_index").joinpath("data").iterdir() if p.name.endswith(suffix))


def _read(path, suffix: str) -> str:
    """Read a filesystem path, falling back to the bundled data directory."""
    from pathlib import Path

    p = Path(path)
    if p.exists():
        return p.read_text()
    bundled = data_file(str(path))
    if bundled.is_file():
        return bundled.read_text()
    bundled = data_file(f"{path}{suffix}")
    if bundled.is_file():
        return bundled.read_text()
    raise FileNotFoundError(path)


def load_presentation(path) -> PresentationFile:
    """Parse a presentation file; bare names such as ``derx`` resolve to bundled data."""
    return parse_presentation(_read(path, ".pres"))


def load_chain(path, pres=None) -> ChainFile:
    return parse_chain(_read(path, ".chain"), pres)


def roundtrip_presentation(text: str) -> bool:
    """Whether ``text`` survives parse → serialize → parse unchanged (after canonicalization)."""
    try:
        canon = serialize_presentation(parse_presentation(text))
    except PresentationError:
        return False
    return serialize_presentation(parse_presentation(canon)) == canon

