"""Acceptance suite: every headline criterion, one pass/fail line each.

The same criterion functions back `pbh verify-paper`; here each runs as its
own test with the fixed tolerances baked into pbh.verify.
"""

import pytest

from pbh.verify import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda fn: fn.__name__)
def test_criterion(criterion):
    result = criterion()
    status = "PASS" if result.passed else "FAIL"
    print(f"{status} {result.name}: {result.detail}")
    assert result.passed, f"{result.name}: {result.detail}"
