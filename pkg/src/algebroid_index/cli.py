"""Command-line interface: ``algebroid-index <subcommand> [flags]``.

Every subcommand prints JSON (one object per line) to stdout, or to the file
named by ``--report``.  The exit status is 0 when all checks pass, 1 when a
check fails and 2 for bad input (unknown suite, unreadable file, bad flag).

Flags can also come from a key-value file given with ``--config``: one
``key = value`` per line, ``#`` starts a comment, keys are the long flag
names without dashes (``presentation``, ``order``, ``moyal-convention``,
``td-convention``, ``u-kind``, ``w``, ``report``, ``threads``, ``chain``,
``presentation2``).  Flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys

from .chernweil import DEFAULT_TD, TD_CONVENTIONS
from .checks import Config, jsonable
from .homalg import UModuleKind
from .weyl import DEFAULT_MOYAL, MOYAL_SCALE

U_MODULE_KINDS = tuple(k.value for k in UModuleKind)
SUBCOMMANDS = ("validate", "pbw", "cocycle", "local-rr", "character", "index-check", "hkr-check", "suite")
_DEFAULTS = {
    "presentation": None,
    "presentation2": None,
    "chain": None,
    "order": None,
    "moyal_convention": DEFAULT_MOYAL,
    "td_convention": DEFAULT_TD,
    "u_kind": "negative",
    "w": None,
    "report": None,
    "threads": 1,
}


class UsageError(ValueError):
    pass


def parse_w(text) -> int | None:
    """``u^k``, ``u``, ``1`` (for ``u^0``) or a bare exponent ``k``."""
    if text is None:
        return None
    s = str(text).strip().replace(" ", "")
    if s == "u":
        return 1
    if s.startswith("u^"):
        s = s[2:].strip("()")
    try:
        return int(s)
    except ValueError:
        raise UsageError(f"cannot read w tag {text!r}; use u^k") from None


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key = key.strip().replace("-", "_")
            if key not in _DEFAULTS and key != "suite":
                raise UsageError(f"{path}:{lineno}: unknown key {key.strip()!r}")
            out[key] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file supplying defaults for the flags below")
    common.add_argument("--presentation", help="presentation file or bundled name (e.g. derxy_curved)")
    common.add_argument("--presentation2", help="second presentation for two-connection families")
    common.add_argument("--chain", help="chain file or bundled name")
    common.add_argument("--order", type=int, help="truncation order N")
    common.add_argument("--moyal-convention", choices=sorted(MOYAL_SCALE))
    common.add_argument("--td-convention", choices=sorted(TD_CONVENTIONS))
    common.add_argument("--u-kind", choices=list(U_MODULE_KINDS))
    common.add_argument("--w", help="w tag, u^k")
    common.add_argument("--report", help="write the JSON lines here instead of stdout")
    common.add_argument("--threads", type=int, help="worker processes for suites")

    parser = argparse.ArgumentParser(prog="algebroid-index", description="Exact checks of the algebraic index theorem for Lie algebroids.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the Lie algebroid axioms of a presentation")
    sub.add_parser("pbw", parents=[common], help="Fedosov form components and Maurer-Cartan residue")
    sub.add_parser("cocycle", parents=[common], help="evaluate the fundamental cocycle on a Weyl chain (or run the cocycle suite)")
    sub.add_parser("local-rr", parents=[common], help="run the local Riemann-Roch suite")
    sub.add_parser("character", parents=[common], help="character map of a chain")
    sub.add_parser("index-check", parents=[common], help="Phi(1) against Td Ch")
    sub.add_parser("hkr-check", parents=[common], help="HKR compatibility on a base chain")
    s = sub.add_parser("suite", parents=[common], help="run a named suite")
    s.add_argument("name", nargs="?", help="suite name (see data/suites.json)")
    s.add_argument("--list", action="store_true", help="list the suites and exit")
    return parser


def resolve(args) -> argparse.Namespace:
    """Merge command line, config file and defaults, in that priority."""
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    merged = dict(_DEFAULTS)
    merged.update(conf)
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if getattr(args, "command", None) == "suite" and not getattr(args, "name", None):
        args.name = conf.get("suite")
    for key in ("order", "threads"):
        if merged[key] is not None:
            merged[key] = int(merged[key])
    if merged["moyal_convention"] not in MOYAL_SCALE:
        raise UsageError(f"unknown Moyal convention {merged['moyal_convention']!r}")
    if merged["td_convention"] not in TD_CONVENTIONS:
        raise UsageError(f"unknown Td convention {merged['td_convention']!r}")
    if merged["u_kind"] not in U_MODULE_KINDS:
        raise UsageError(f"unknown u-kind {merged['u_kind']!r}")
    merged["w"] = parse_w(merged["w"])
    for key, val in merged.items():
        setattr(args, key, val)
    return args


def config_of(args) -> Config:
    return Config(
        moyal=args.moyal_convention,
        td=args.td_convention,
        u_kind=args.u_kind,
        w=args.w,
        order=args.order,
        presentation=args.presentation,
        presentation2=args.presentation2,
        chain=args.chain,
    )


def _line(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"this subcommand needs --{n.replace('_', '-')}")


def _load_pf(args):
    from .io import load_presentation

    return load_presentation(args.presentation)


def _conn(pf):
    from .algebroid import Connection

    return pf.conn if pf.conn is not None else Connection.zero(pf.pres.rank, pf.pres.rank)


# ---------------------------------------------------------------------------
# subcommands: each returns (lines, ok)
# ---------------------------------------------------------------------------
def cmd_validate(args):
    from .algebroid import validate

    _need(args, "presentation")
    pf = _load_pf(args)
    rep = validate(pf.pres)
    return [_line({"check": "validate", "presentation": args.presentation, "valid": rep.valid, "failures": jsonable(rep.failures)})], rep.valid


def cmd_pbw(args):
    from .pbw import PBW, fedosov_A, mc_terms

    _need(args, "presentation")
    pf = _load_pf(args)
    N = args.order or 4
    pb = PBW(pf.pres, _conn(pf), pf.econn)
    A = fedosov_A(pb, N + 1)
    comps = {}
    for a in range(pb.r):
        comps[f"e{a + 1}"] = {str(k): str(A.component(k, a)) for k in A.weights()}
    residues = {f"{a + 1},{b + 1}": str(t["residue"]) for (a, b), t in mc_terms(pb, A, N).items()}
    ok = all(v == "0" for v in residues.values())
    return [_line({"check": "pbw", "presentation": args.presentation, "order": N, "A": comps, "mc_residue": residues, "equal": ok})], ok


def cmd_cocycle(args):
    if args.chain is None:
        return _suite_lines("cocycle", args)
    from .cocycle import tau_component
    from .io import load_chain

    cf = load_chain(args.chain)
    if cf.kind != "weyl":
        raise UsageError("the cocycle subcommand needs a chain over a Weyl algebra")
    n, w = cf.n, args.w or 0
    lines = []
    for k in range(n + 1):
        val = tau_component(n, k, cf.chain)
        for e in sorted(val.exponents()):
            lines.append(_line({"component": 2 * n - 2 * k, "u_exponent": e - k + w, "value": str(val[e])}))
    return lines, True


def cmd_character(args):
    from .character import CharacterMap
    from .io import load_chain

    _need(args, "presentation", "chain")
    pf = _load_pf(args)
    chain = load_chain(args.chain, pf.pres).chain.truncate(args.u_kind)
    w = pf.pres.rank if args.w is None else args.w
    cm = CharacterMap(pf.pres, _conn(pf), pf.econn, w)
    out = cm(chain)
    return [_line({"check": "character", "presentation": args.presentation, "chain": args.chain, "u_kind": args.u_kind, "w": w, "components": out.to_json()})], True


def cmd_index(args):
    from .character import index_check

    _need(args, "presentation")
    pf = _load_pf(args)
    w = pf.pres.rank if args.w is None else args.w
    rec = index_check(pf.pres, _conn(pf), pf.econn, w, args.td_convention, args.presentation)
    return [rec.to_json()], rec.equal


def cmd_hkr(args):
    from .character import hkr_compat_check, hkr_mixed_check
    from .io import load_chain

    _need(args, "presentation", "chain")
    pf = _load_pf(args)
    cf = load_chain(args.chain, pf.pres)
    if cf.kind != "base":
        raise UsageError("hkr-check needs a chain over the base ring")
    w = pf.pres.rank if args.w is None else args.w
    recs = [
        hkr_compat_check(pf.pres, _conn(pf), cf.chain, pf.econn, w, args.td_convention, args.chain),
        hkr_mixed_check(cf.chain, pf.pres, args.chain),
    ]
    return [r.to_json() for r in recs], all(r.equal for r in recs)


def _suite_lines(name, args):
    from .suites import run_suite

    report = run_suite(name, config_of(args), args.threads or 1)
    return report.lines(), report.passed


def cmd_suite(args):
    from .suites import load_suites

    if getattr(args, "list", False):
        return [_line({"suite": k, "description": v.get("description", "")}) for k, v in load_suites().items()], True
    if not args.name:
        raise UsageError("suite needs a name (or --list)")
    return _suite_lines(args.name, args)


HANDLERS = {
    "validate": cmd_validate,
    "pbw": cmd_pbw,
    "cocycle": cmd_cocycle,
    "local-rr": lambda args: _suite_lines("local-rr", args),
    "character": cmd_character,
    "index-check": cmd_index,
    "hkr-check": cmd_hkr,
    "suite": cmd_suite,
}


def main(argv=None) -> int:
    from .suites import SuiteError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve(args)
        lines, ok = HANDLERS[args.command](args)
    except (UsageError, SuiteError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"algebroid-index: error: {exc}", file=sys.stderr)
        return 2
    text = "\n".join(lines) + "\n"
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
