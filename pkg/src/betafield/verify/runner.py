"""Run suites, print one line per check and write a JSON report."""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

from .stats import TestReport
from .suites import SUITES, SuiteContext

__all__ = ["SuiteResult", "run_suite", "run_suites", "write_report"]


@dataclass
class SuiteResult:
    name: str
    reports: list[TestReport] = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.reports) and all(r.passed for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "seconds": self.seconds,
            "error": self.error,
            "reports": [r.to_dict() for r in self.reports],
        }


def run_suite(name: str, seed: int, *, scale: float = 1.0, jobs: int = 1) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    ctx = SuiteContext(seed, name, scale, jobs)
    t0 = time.perf_counter()
    result = SuiteResult(name)
    try:
        result.reports = SUITES[name](ctx)
    except Exception as exc:  # a crashing suite is a failing suite
        result.error = f"{type(exc).__name__}: {exc}"
    result.seconds = time.perf_counter() - t0
    return result


def run_suites(
    names: Iterable[str], seed: int, *, scale: float = 1.0, jobs: int = 1, stream: TextIO | None = sys.stdout
) -> list[SuiteResult]:
    """Run ``names`` in order; results are keyed and ordered by suite name."""
    results = []
    for name in names:
        res = run_suite(name, seed, scale=scale, jobs=jobs)
        if stream is not None:
            for r in res.reports:
                print(r.line(), file=stream)
            if res.error:
                print(f"{name:<48s} error    {res.error}  FAIL", file=stream)
            print(f"== {name}: {'PASS' if res.passed else 'FAIL'} ({res.seconds:.1f} s)", file=stream)
        results.append(res)
    return results


def write_report(path: str | Path, results: list[SuiteResult], *, seed: int, scale: float) -> None:
    doc = {
        "seed": seed,
        "scale": scale,
        "seed_scheme": "SeedSequence([seed, crc32(suite name)])",
        "passed": all(r.passed for r in results),
        "suites": [r.to_dict() for r in sorted(results, key=lambda r: r.name)],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
