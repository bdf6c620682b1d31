"""Tests for the verification suites."""

import json
import math
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from ceshock.errors import SolverError
from ceshock.flux_model import FluxModel, ShockData, chord_P
from ceshock.verification import (
    SUITES,
    CriterionResult,
    VerificationReport,
    _plain,
    run_criterion,
    run_suite,
)


def test_suites() -> None:
    """Test that every check belongs to the full suite and to one smaller suite."""
    assert SUITES["all"] == tuple(range(1, 13))
    partial = {n for name, numbers in SUITES.items() if name != "all" for n in numbers}
    assert partial == set(SUITES["all"])
    assert SUITES["determinism"] == (12,)


def test_closed_form_check() -> None:
    """Test the check of the relaxation wave against its closed form."""
    result = run_criterion(1)
    assert result.passed
    assert result.details["sup_error"] <= 1e-8


@patch("ceshock.verification.burgers_closed_form")
def test_closed_form_check_fails(closed_form_mock: MagicMock) -> None:
    """Test that a wrong reference makes the check fail."""
    closed_form_mock.side_effect = lambda shock, flux, xs: np.full_like(xs, 1.0)
    result = run_criterion(1)
    assert not result.passed
    assert result.details["sup_error"] > 0.5


def _flipped_chord(shock: ShockData, flux: FluxModel, u: float) -> float:
    return -chord_P(shock, flux, u)


@patch("ceshock.wave_solvers.chord_P", _flipped_chord)
def test_mutated_solver_is_caught() -> None:
    """Test that a sign error in the wave equation does not pass the suite."""
    result = run_criterion(1)
    assert not result.passed


@patch("ceshock.verification.solve_relaxation")
def test_check_error_recorded(solve_mock: MagicMock) -> None:
    """Test that a check raising an error is recorded as failed."""
    solve_mock.side_effect = SolverError("integration failed")
    result = run_criterion(1)
    assert not result.passed
    assert result.details == {"error": "integration failed"}


def test_remainders_suite() -> None:
    """Test that the remainder checks pass."""
    report = run_suite("remainders")
    assert [r.number for r in report.results] == [9, 10]
    assert report.passed, report.to_dict()
    assert report.results[1].details["exact_R1_R2"] is True
    json.dumps(report.to_dict(), allow_nan=False)


def test_determinism_check() -> None:
    """Test that repeated runs write identical files."""
    assert run_criterion(12).passed


def test_unknown_suite() -> None:
    """Test that an unknown suite is rejected."""
    with pytest.raises(KeyError):
        run_suite("everything")


def test_report_to_dict() -> None:
    """Test the JSON form of a verification report."""
    report = VerificationReport(
        "burgers",
        (CriterionResult(1, "first", True), CriterionResult(2, "second", False)),
    )
    assert not report.passed
    data = report.to_dict()
    assert data["suite"] == "burgers"
    assert data["passed"] is False
    assert data["criteria"][1] == {
        "number": 2,
        "name": "second",
        "passed": False,
        "details": {},
    }


@pytest.mark.parametrize(
    "value,expected",
    (
        (np.float64(0.5), 0.5),
        (np.bool_(True), True),
        (math.inf, "inf"),
        ((1, np.float64(2.0)), [1, 2.0]),
        ({"a": {"b": np.float64(math.nan)}}, {"a": {"b": "nan"}}),
        ("text", "text"),
    ),
)
def test_plain(value: object, expected: object) -> None:
    """Test conversion of check details to JSON-compatible values."""
    assert _plain(value) == expected
