"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also gathered into the terminal summary (see conftest.py).
"""
import pytest

from driveby import validation as v

RESULTS = []


def _run(check, ctx):
    res = check(ctx)
    RESULTS.append(res)
    print(res.line())
    assert res.passed, res.line()


@pytest.mark.parametrize("check", v.CHECKS, ids=[c.__name__.removeprefix("check_") for c in v.CHECKS])
def test_criterion(check, ctx):
    _run(check, ctx)
