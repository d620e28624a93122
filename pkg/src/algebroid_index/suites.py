"""Running named suites of checks and assembling the report.

A suite is a list of check ids read from ``data/suites.json``; an entry may
be a bare id or ``{"id": ..., "fatal": false}`` for stretch goals whose
failure is reported but does not fail the suite.  Checks run in a process
pool when more than one thread is requested.  Results are gathered back in
suite order, so the report never depends on the schedule.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

from .checks import CHECKS, Config, Outcome, run_check


class SuiteError(ValueError):
    """Unknown suite, unknown check, or a configuration the suite cannot run with."""


@dataclass(frozen=True)
class SuiteEntry:
    check: str
    fatal: bool = True


def load_suites() -> dict:
    text = resources.files("algebroid_index").joinpath("data", "suites.json").read_text()
    return json.loads(text)


def suite_entries(name: str, suites: dict | None = None) -> list:
    """Flattened entries of ``name``; ``include`` pulls in other suites in order."""
    suites = load_suites() if suites is None else suites
    if name not in suites:
        raise SuiteError(f"unknown suite {name!r}; known: {', '.join(sorted(suites))}")
    spec = suites[name]
    out = []
    for sub in spec.get("include", []):
        out += suite_entries(sub, suites)
    for item in spec.get("checks", []):
        entry = SuiteEntry(item) if isinstance(item, str) else SuiteEntry(item["id"], item.get("fatal", True))
        if entry.check not in CHECKS:
            raise SuiteError(f"suite {name!r} names unknown check {entry.check!r}")
        out.append(entry)
    return out


def min_order(name: str, suites: dict | None = None) -> int:
    suites = load_suites() if suites is None else suites
    spec = suites[name]
    own = spec.get("min_order", 0)
    return max([own] + [min_order(s, suites) for s in spec.get("include", [])])


@dataclass
class Report:
    suite: str
    config: Config
    records: list = field(default_factory=list)
    adjudications: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.equal for r in self.records if r.fatal)

    def summary(self) -> dict:
        fatal = [r for r in self.records if r.fatal]
        return {
            "summary": self.suite,
            "checks": len(self.records),
            "failed": sorted({r.check for r in fatal if not r.equal}),
            "failed_nonfatal": sorted({r.check for r in self.records if not r.fatal and not r.equal}),
            "pass": self.passed,
            "config": {k: v for k, v in vars(self.config).items()},
        }

    def lines(self) -> list:
        out = [r.to_json() for r in self.records]
        out += [json.dumps({"adjudication": a}, sort_keys=True, ensure_ascii=False) for a in self.adjudications]
        out.append(json.dumps(self.summary(), sort_keys=True, ensure_ascii=False))
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _run(args) -> Outcome:
    name, cfg = args
    return run_check(name, cfg)


def run_suite(name: str, cfg: Config, threads: int = 1) -> Report:
    """Run every check of suite ``name``; adjudications are de-duplicated by flag and criterion."""
    entries = suite_entries(name)
    need = min_order(name)
    if cfg.order is not None and cfg.order < need:
        raise SuiteError(f"suite {name!r} needs --order >= {need}")
    jobs = [(e.check, cfg) for e in entries]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run, jobs))
    else:
        outcomes = [_run(j) for j in jobs]
    report = Report(name, cfg)
    seen = set()
    for entry, outcome in zip(entries, outcomes):
        for rec in outcome.records:
            rec.fatal = entry.fatal
            report.records.append(rec)
        for adj in outcome.adjudications:
            key = json.dumps(adj, sort_keys=True)
            if key not in seen:
                seen.add(key)
                report.adjudications.append(adj)
    return report
