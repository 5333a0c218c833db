"""Acceptance criteria, one test per criterion.

The suite runs once for criteria 1 to 11 and a second time for criterion 12,
which compares the two numeric payloads byte for byte. A one-line verdict
per criterion is printed in the terminal summary.
"""

import pytest

from qoracle.suite import CRITERIA, determinism_result, run_suite

SEED = 42
VERDICTS: list[str] = []


@pytest.fixture(scope="module")
def first_run():
    return run_suite(SEED)


@pytest.fixture(scope="module")
def second_run():
    return run_suite(SEED)


def _record(result):
    line = result.line()
    VERDICTS.append(line)
    print(line)
    return result


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(first_run, number):
    result = _record(next(r for r in first_run.results if r.number == number))
    assert result.passed, result.details


@pytest.mark.slow
def test_criterion_12_determinism(first_run, second_run):
    result = _record(determinism_result(first_run, second_run))
    assert result.passed, result.details
