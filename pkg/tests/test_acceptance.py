"""The ten acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line (uncaptured), then asserts.
"""
import pytest

from henonlab.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = CRITERIA[number]()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.summary
