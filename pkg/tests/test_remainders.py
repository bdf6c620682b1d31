"""Tests for the exact remainders of the relaxation wave."""

from contextlib import nullcontext as does_not_raise
from itertools import pairwise
from typing import Any

import numpy as np
import pytest
import sympy

from ceshock.errors import ModelError, SolverError
from ceshock.flux_model import U, FluxModel, ShockData, make_shock
from ceshock.remainders import (
    REMAINDER_TABLE_HEADER,
    ExactPolynomial,
    NonPolynomialFlux,
    RemainderOverflowError,
    chord_expression,
    chord_polynomial,
    compute_remainders,
    remainder_expressions,
    remainder_sequence,
    remainder_table_rows,
    verify_qn_identity,
)
from ceshock.wave_solvers import solve_relaxation

R = sympy.Rational


def test_exact_polynomial() -> None:
    """Test exact arithmetic on polynomials."""
    p = ExactPolynomial((1, 2, 0))
    assert p.coeffs == (R(1), R(2))
    assert p.degree == 1
    assert ExactPolynomial(()).degree == -1

    square = p * p
    assert square.coeffs == (R(1), R(4), R(4))
    assert square.derivative().coeffs == (R(4), R(8))
    assert square(R(1, 2)) == R(4)
    assert square.evaluate(0.5) == pytest.approx(4.0)
    np.testing.assert_allclose(square.evaluate(np.array([0.0, 1.0])), [1.0, 9.0])
    assert sympy.expand(square.as_expr() - (1 + 2 * U) ** 2) == 0


def test_exact_polynomial_from_expression() -> None:
    """Test conversion from a sympy expression."""
    p = ExactPolynomial.from_expression(U**2 / 2 - R(1, 5) * U)
    assert p.coeffs == (R(0), R(-1, 5), R(1, 2))
    assert ExactPolynomial.from_poly(p.to_poly()) == p


def test_chord_polynomial(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that P is exact for decimal end states."""
    p = chord_polynomial(moving_shock, burgers)
    assert p.coeffs == (R(3, 200), R(-1, 5), R(1, 2))
    assert p(R(3, 10)) == 0
    assert p(R(1, 10)) == 0


def test_chord_expression_non_polynomial(
    moving_shock: ShockData, exponential: FluxModel
) -> None:
    """Test the symbolic chord of the exponential flux."""
    expression = chord_expression(moving_shock, exponential)
    assert float(expression.subs(U, R(3, 10))) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(NonPolynomialFlux):
        chord_polynomial(moving_shock, exponential)


def test_chord_expression_numeric_flux(moving_shock: ShockData) -> None:
    """Test that a flux without a symbolic form has no exact chord."""
    flux = FluxModel.from_callables(
        "numeric",
        lambda u: 0.5 * np.asarray(u) ** 2,
        lambda u: np.asarray(u, dtype=float),
        lambda u: np.ones_like(np.asarray(u, dtype=float)),
        2.0,
    )
    with pytest.raises(NonPolynomialFlux, match="no symbolic form"):
        chord_expression(moving_shock, flux)


def test_remainder_sequence(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test the first remainders of Burgers' flux."""
    r1, r2 = remainder_sequence(moving_shock, burgers, 2)
    assert r1.coeffs == (R(-1, 5), R(1))
    # R_2 = P'^2 + P P''
    assert r2.coeffs == (R(11, 200), R(-3, 5), R(3, 2))


def test_remainder_endpoint_values(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that R_{n+1} = P' R_n at the end states, where P vanishes."""
    sequence = remainder_sequence(moving_shock, burgers, 8)
    slope = chord_polynomial(moving_shock, burgers).derivative()
    for state in (R(3, 10), R(1, 10)):
        for r_n, r_next in pairwise(sequence):
            assert r_next(state) == slope(state) * r_n(state)


def test_remainder_degrees(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that R_n has degree n for Burgers' flux."""
    sequence = remainder_sequence(moving_shock, burgers, 8)
    assert [r.degree for r in sequence] == list(range(1, 9))


def test_remainder_scaling(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that halving both states turns R_n(u) into R_n(2u) / 2^n."""
    halved = make_shock(burgers, 0.15, 0.05, 1.0)
    sequence = remainder_sequence(moving_shock, burgers, 8)
    scaled = remainder_sequence(halved, burgers, 8)
    for n, (r_n, s_n) in enumerate(zip(sequence, scaled), start=1):
        for u in (R(1, 10), R(1, 7), R(1, 5), R(3, 10)):
            assert s_n(u / 2) == r_n(u) / 2**n

    norms = compute_remainders(moving_shock, burgers, 8)
    halved_norms = compute_remainders(halved, burgers, 8)
    for report, halved_report in zip(norms, halved_norms):
        assert halved_report.sup_norm == pytest.approx(
            report.sup_norm / 2**report.n, rel=1e-12
        )


@pytest.mark.parametrize(
    "n_max,raises",
    (
        (1, does_not_raise()),
        (20, does_not_raise()),
        (0, pytest.raises(ModelError, match="at least 1")),
        (21, pytest.raises(RemainderOverflowError)),
    ),
)
def test_remainder_sequence_order(
    n_max: int, raises: Any, moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test the range of exact remainder orders."""
    with raises:
        assert len(remainder_sequence(moving_shock, burgers, n_max)) == n_max


def test_remainder_overflow_error() -> None:
    """Test that the overflow error is a solver error and an OverflowError."""
    assert issubclass(RemainderOverflowError, SolverError)
    assert issubclass(RemainderOverflowError, OverflowError)


def test_remainder_expressions(moving_shock: ShockData, exponential: FluxModel) -> None:
    """Test symbolic remainders of the exponential flux."""
    r1, r2 = remainder_expressions(moving_shock, exponential, 2)
    chord = chord_expression(moving_shock, exponential)
    assert sympy.simplify(r1 - sympy.diff(chord, U)) == 0
    assert r2.has(sympy.exp)
    with pytest.raises(RemainderOverflowError):
        remainder_expressions(moving_shock, exponential, 7)


@pytest.mark.parametrize("n", (1, 2, 3, 4))
def test_burgers_remainder_norms(
    n: int, moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that sup |R_n| = (delta / 2)^n for Burgers' flux and small n."""
    report = compute_remainders(moving_shock, burgers, n)[-1]
    assert report.n == n
    assert report.sup_norm == pytest.approx(0.1**n, rel=1e-12)
    assert report.delta_scaled == pytest.approx(0.5**n, rel=1e-12)
    assert report.gamma_factor == pytest.approx((0.2 / 0.96) ** n)
    assert report.gamma_n_times_norm == pytest.approx(
        report.gamma_factor * report.sup_norm
    )


def test_exponential_remainder_norms(exponential: FluxModel) -> None:
    """Test sup |R_1| = sup |e^u - lambda| for the exponential flux."""
    shock = make_shock(exponential, 0.3, 0.1, 2.5)
    report = compute_remainders(shock, exponential, 1)[0]
    lam = shock.lam
    expected = max(abs(np.exp(0.3) - lam), abs(np.exp(0.1) - lam))
    assert report.sup_norm == pytest.approx(expected, rel=1e-12)


def test_normalized_remainders_decay(burgers: FluxModel) -> None:
    """Test that sup |R_n| / (delta^n n!) stays bounded for Burgers' flux."""
    shock = make_shock(burgers, 0.25, 0.15, 1.0)
    reports = compute_remainders(shock, burgers, 12)
    normalized = [r.normalized for r in reports]
    assert max(normalized) <= 1.0
    assert normalized[-1] < normalized[0]


def test_remainder_table_rows(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test the rows of the remainder table."""
    rows = remainder_table_rows(compute_remainders(moving_shock, burgers, 3))
    assert [row[0] for row in rows] == [1, 2, 3]
    assert all(len(row) == len(REMAINDER_TABLE_HEADER) for row in rows)
    assert rows[0][4] == pytest.approx(rows[0][1] * rows[0][3])


@pytest.mark.parametrize("n", (1, 2, 3))
def test_verify_qn_identity_burgers(
    n: int, moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test the operator identity along the closed-form Burgers wave."""
    profile = solve_relaxation(moving_shock, burgers)
    assert verify_qn_identity(moving_shock, burgers, n, profile) < 1e-8


@pytest.mark.parametrize("flux_name", ("quartic", "exponential"))
def test_verify_qn_identity_general(
    flux_name: str, request: pytest.FixtureRequest
) -> None:
    """Test the operator identity along a computed relaxation wave."""
    flux = request.getfixturevalue(flux_name)
    shock = make_shock(flux, 0.3, 0.1, 2.5)
    profile = solve_relaxation(shock, flux)
    for n in (1, 2, 3):
        assert verify_qn_identity(shock, flux, n, profile) < 1e-8


def test_verify_qn_identity_order(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that the identity is only checked for small orders."""
    profile = solve_relaxation(moving_shock, burgers)
    with pytest.raises(ModelError, match="1 <= n <= 6"):
        verify_qn_identity(moving_shock, burgers, 7, profile)
