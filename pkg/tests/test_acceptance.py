"""Acceptance criteria 1-10, each at its stated tolerance.

Every criterion prints one ``[PASS]``/``[FAIL]`` line; the lines are also
collected into the pytest terminal summary.  Run standalone with
``python3 tests/test_acceptance.py``.
"""

import sys

import pytest

from sphmean.verification import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = run_criterion(number, seed=0)
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line


if __name__ == "__main__":
    failed = 0
    for k in sorted(CRITERIA):
        res = run_criterion(k, seed=0)
        print(res.line(), flush=True)
        failed += not res.passed
    sys.exit(1 if failed else 0)
