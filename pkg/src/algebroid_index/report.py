"""Check records shared by the test suites and the command line.

Every check produces one :class:`CheckRecord`.  Records serialize to JSON with
sorted keys; apart from ``elapsed`` the output depends only on the inputs, so
two runs (with any thread count) produce byte-identical records.
"""

from __future__ import annotations

import hashlib
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field


def digest(*parts) -> str:
    """Short stable digest of the textual form of the inputs."""
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\x00")
    return h.hexdigest()[:16]


@dataclass
class CheckRecord:
    check: str
    anchor: str
    inputs: str
    lhs: object
    rhs: object
    equal: bool
    elapsed: float = 0.0
    note: str = ""
    fatal: bool = True

    def to_dict(self) -> dict:
        d = {
            "check": self.check,
            "anchor": self.anchor,
            "inputs_digest": self.inputs,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "equal": bool(self.equal),
            "elapsed": round(self.elapsed, 6),
        }
        if self.note:
            d["note"] = self.note
        if not self.fatal:
            d["fatal"] = False
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


@dataclass
class Stopwatch:
    start: float = field(default_factory=time.perf_counter)

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start


@contextmanager
def timed():
    sw = Stopwatch()
    yield sw


def dumps(records) -> str:
    return "\n".join(r.to_json() for r in records) + ("\n" if records else "")


def strip_elapsed(text: str) -> str:
    """Records with the timing field removed, for reproducibility comparisons."""
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        d.pop("elapsed", None)
        out.append(json.dumps(d, sort_keys=True, ensure_ascii=False))
    return "\n".join(out)
