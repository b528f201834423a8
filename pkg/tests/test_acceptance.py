"""The fifteen acceptance criteria at their stated sizes and tolerances.

Each criterion is one verification suite (see ``betafield.verify.suites``);
the run prints one ``criterion k (suite): PASS/FAIL`` line per criterion.
The master seed defaults to 7 and can be changed with
``BETAFIELD_ACCEPTANCE_SEED``. Also runnable as a script:

    python3 tests/test_acceptance.py [seed]
"""

import os
import sys

import pytest

from betafield.verify import CRITERIA, run_suite

SEED = int(os.environ.get("BETAFIELD_ACCEPTANCE_SEED", "7"))


def verdict_line(k: int, result) -> str:
    status = "PASS" if result.passed else "FAIL"
    return f"criterion {k:2d} ({result.name}): {status}  [{len(result.reports)} checks, {result.seconds:.1f} s, seed {SEED}]"


def failure_detail(result) -> str:
    lines = [r.line() for r in result.reports if not r.passed]
    if result.error:
        lines.append(f"error: {result.error}")
    return "\n".join(lines)


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CRITERIA), ids=[f"{k:02d}-{CRITERIA[k]}" for k in sorted(CRITERIA)])
def test_criterion(k, capsys):
    result = run_suite(CRITERIA[k], SEED)
    with capsys.disabled():
        print("\n" + verdict_line(k, result))
    assert result.passed, failure_detail(result)


if __name__ == "__main__":
    if len(sys.argv) > 1:
        SEED = int(sys.argv[1])
    ok = True
    for k in sorted(CRITERIA):
        result = run_suite(CRITERIA[k], SEED)
        print(verdict_line(k, result), flush=True)
        if not result.passed:
            print(failure_detail(result))
        ok &= result.passed
    sys.exit(0 if ok else 1)
