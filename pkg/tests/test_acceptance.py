"""Acceptance criteria 1-10 from one pinned-seed selftest.

The selftest runs the suite twice (one worker, then four) and records the
byte comparison of the two JSON reports as criterion 10.
"""

import pytest
from conftest import ACCEPTANCE_KEY

from hypoheat.suite import DEFAULT_SEED, criterion_of, selftest

TITLES = {
    1: "symbolic intertwining, exact zero residuals on the rho x eps grid",
    2: "Bochner-Weitzenboeck residual, 100 random one-forms at three eps",
    3: "heat oracle identities and exact semigroup property",
    4: "Bismut estimate of dP_t(xz) vs oracle, eps-independence on common noise",
    5: "Levy area moments and monotone step-refinement bias",
    6: "pathwise transport bound, zero violations under exp_splitting",
    7: "gradient, Poincare and log-Sobolev checks on Heisenberg and SU(2)",
    8: "integration by parts equality with the analytic anchor",
    9: "decay slope on SU(2) at the optimal eps",
    10: "byte-identical reports across worker counts",
}
RUNTIME_LIMITS = {1: 1.0, 2: 10.0, 4: 600.0}


@pytest.fixture(scope="session")
def suite_report():
    return selftest(DEFAULT_SEED, workers=1)


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(TITLES))
def test_criterion(number, suite_report, request):
    checks = [c for c in suite_report.checks if criterion_of(c) == number]
    assert checks, f"criterion {number} missing from the report"
    runtime = sum(c.runtime for c in checks)
    limit = RUNTIME_LIMITS.get(number)
    within = limit is None or runtime < limit
    ok = all(c.passed for c in checks) and within
    failed = [c.name for c in checks if not c.passed]
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {TITLES[number]}  ({runtime:.2f}s)"
    if failed:
        line += f"  failing: {', '.join(failed)}"
    if not within:
        line += f"  runtime over {limit}s"
    request.config.stash[ACCEPTANCE_KEY][number] = line
    print(line)
    assert all(c.passed for c in checks), [c.to_dict() for c in checks if not c.passed]
    assert within, f"runtime {runtime:.2f}s exceeds {limit}s"
