"""Tests for the second-order wave V2 and its comparison profiles."""

from contextlib import nullcontext as does_not_raise
from typing import Any
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from ceshock.flux_model import FluxModel, ShockData, get_flux, make_shock
from ceshock.second_order import (
    DiscriminantError,
    Endpoint,
    PhasePoint,
    ShootingSettings,
    TrajectoryEscape,
    check_sandwich_v2,
    comparison_mus,
    ell,
    reference_curve,
    residual_factor,
    reversal_discrepancy,
    saddle_slope,
    smallest_comparison_C,
    solve_v2,
    trace_phase_curve,
    v2_residual,
)
from ceshock.wave_solvers import SettingsError, WaveProfile, solve_relaxation


@pytest.fixture
def v2(moving_shock: ShockData, burgers: FluxModel) -> WaveProfile:
    """The V2 wave of the moving Burgers shock."""
    return solve_v2(moving_shock, burgers)


@pytest.mark.parametrize(
    "kwargs,raises",
    (
        ({}, does_not_raise()),
        ({"eta": 1e-4, "u_steps": 101}, does_not_raise()),
        ({"eta": 0.3}, pytest.raises(SettingsError, match="eta")),
        ({"u_steps": 3}, pytest.raises(SettingsError, match="u_steps")),
        ({"comparison_C": 0.0}, pytest.raises(SettingsError)),
    ),
)
def test_shooting_settings(kwargs: dict[str, Any], raises: Any) -> None:
    """Test that shooting settings are range checked."""
    with raises:
        ShootingSettings(**kwargs)


def test_ell(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test the factor l(u) = 1 / (a^2 - lambda f'(u))."""
    assert ell(moving_shock, burgers, 0.3) == pytest.approx(1.0 / 0.94)
    assert ell(moving_shock, burgers, 0.1) == pytest.approx(1.0 / 0.98)


def test_saddle_slope(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test the slope of the trajectory leaving the saddle."""
    slope = saddle_slope(moving_shock, burgers, Endpoint.LEFT)
    assert slope == pytest.approx(0.0979583, rel=1e-5)

    # The slope solves lambda l s^2 + s - P' = 0
    l_e = 1.0 / 0.94
    assert 0.2 * l_e * slope**2 + slope - 0.1 == pytest.approx(0.0, abs=1e-15)


def test_saddle_slope_complex(burgers: FluxModel) -> None:
    """Test that complex eigenvalues at the node are reported."""
    shock = ShockData(1.5, -0.5, 1.0, 0.5)
    with pytest.raises(DiscriminantError):
        saddle_slope(shock, burgers, "right")


def test_trace_phase_curve(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test the shape of the traced trajectory."""
    curve = trace_phase_curve(moving_shock, burgers, ShootingSettings(u_steps=401))
    assert np.all(np.diff(curve.us) < 0.0)
    assert np.all(np.diff(curve.xs) > 0.0)
    assert np.all(curve.ws < 0.0)
    assert curve.us[0] < moving_shock.u_minus
    assert curve.us[-1] > moving_shock.u_plus

    centre = int(np.argmin(np.abs(curve.us - moving_shock.midpoint)))
    assert curve.xs[centre] == 0.0

    points = curve.points()
    assert len(points) == curve.us.size
    assert isinstance(points[0], PhasePoint)

    # Near the saddle the trajectory leaves along w = s (u - u_-)
    slope = saddle_slope(moving_shock, burgers, Endpoint.LEFT)
    gap = curve.us[0] - moving_shock.u_minus
    assert curve.ws[0] == pytest.approx(slope * gap)


def test_trace_phase_curve_standing(
    standing_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that a standing shock has no phase plane."""
    with pytest.raises(TrajectoryEscape):
        trace_phase_curve(standing_shock, burgers)


def test_solve_v2(v2: WaveProfile, moving_shock: ShockData) -> None:
    """Test that V2 is a valid profile of the shock."""
    assert v2.model_tag == "v2"
    assert v2.shock == moving_shock
    assert v2.normalization_residual < 1e-9 * moving_shock.delta
    assert v2.us[0] == pytest.approx(moving_shock.u_minus, abs=1e-9)
    assert v2.us[-1] == pytest.approx(moving_shock.u_plus, abs=1e-9)
    v2.validate()


def test_solve_v2_standing(standing_shock: ShockData, burgers: FluxModel) -> None:
    """Test that V2 is the relaxation wave when lambda = 0."""
    v2 = solve_v2(standing_shock, burgers)
    relaxation = solve_relaxation(standing_shock, burgers)
    assert v2.model_tag == "v2"
    np.testing.assert_array_equal(v2.xs, relaxation.xs)
    np.testing.assert_array_equal(v2.us, relaxation.us)
    assert reversal_discrepancy(standing_shock, burgers) == 0.0


def test_solve_v2_negative_speed(v2: WaveProfile, burgers: FluxModel) -> None:
    """Test V2 of a shock with negative speed, whose saddle is the right state."""
    shock = make_shock(burgers, -0.1, -0.3, 1.0)
    assert shock.lam == pytest.approx(-0.2)
    curve = trace_phase_curve(shock, burgers)
    slope = saddle_slope(shock, burgers, Endpoint.RIGHT)
    assert curve.ws[-1] == pytest.approx(slope * (curve.us[-1] - shock.u_plus))

    negative = solve_v2(shock, burgers)
    negative.validate()
    assert negative.us[0] == pytest.approx(shock.u_minus, abs=1e-9)
    assert negative.us[-1] == pytest.approx(shock.u_plus, abs=1e-9)

    # Burgers' flux is even, so this wave is -v2(-x)
    np.testing.assert_allclose(negative.us, -v2.at(-negative.xs), rtol=0, atol=1e-9)


@pytest.mark.parametrize(
    "flux_name,u_minus,u_plus,a",
    (
        ("burgers", 0.3, 0.1, 1.0),
        ("burgers", -0.1, -0.3, 1.0),
        ("quartic", 0.3, 0.1, 1.0),
        ("exponential", 0.3, 0.1, 2.5),
    ),
)
def test_reversal_discrepancy(
    flux_name: str, u_minus: float, u_plus: float, a: float
) -> None:
    """Test that the mirrored problem gives the reflected wave."""
    flux = get_flux(flux_name)
    shock = make_shock(flux, u_minus, u_plus, a)
    assert reversal_discrepancy(shock, flux) < 1e-10


@patch("ceshock.second_order.mirror_shock")
def test_reversal_discrepancy_detects_mismatch(
    mirror_mock: MagicMock, moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that a mirrored problem with other states is not accepted."""
    mirror_mock.return_value = (make_shock(burgers, -0.05, -0.3, 1.0), burgers)
    assert reversal_discrepancy(moving_shock, burgers) > 1e-3


def test_phase_curve_between_reference_curves(
    moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that the trajectory stays between the reference curves w_mu+/-."""
    curve = trace_phase_curve(moving_shock, burgers, ShootingSettings(u_steps=401))
    C_min = smallest_comparison_C(moving_shock, burgers)
    C = max(C_min, ShootingSettings().comparison_C)
    mu_minus, mu_plus = comparison_mus(moving_shock, C)
    below = reference_curve(moving_shock, burgers, mu_plus, curve.us)
    above = reference_curve(moving_shock, burgers, mu_minus, curve.us)
    assert np.all(below < above)
    assert np.all(curve.ws > below - 1e-10)
    assert np.all(curve.ws < above + 1e-10)

    centre = np.abs(curve.us - moving_shock.midpoint) < moving_shock.delta / 4
    assert np.all(below[centre] < curve.ws[centre])
    assert np.all(curve.ws[centre] < above[centre])


def test_v2_residual(
    v2: WaveProfile, moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that V2 solves its equation up to the differencing error."""
    assert v2_residual(moving_shock, burgers, v2) < 1e-5


def test_comparison_mus(moving_shock: ShockData) -> None:
    """Test the comparison parameters lambda^2 (1 -/+ C delta^2)."""
    assert comparison_mus(moving_shock, 1.0) == pytest.approx((0.0384, 0.0416))


def test_residual_factor(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test K at the left end state, where P vanishes."""
    d = 0.2 / 0.96
    value = residual_factor(moving_shock, burgers, 0.04, 0.3)
    assert value == pytest.approx(-(d**2) * 0.01, rel=1e-9)


def test_reference_curve(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that the reference curves lie below the axis inside the shock."""
    u = np.linspace(0.1, 0.3, 21)
    w = reference_curve(moving_shock, burgers, 0.04, u)
    assert w[0] == pytest.approx(0.0, abs=1e-15)
    assert w[-1] == pytest.approx(0.0, abs=1e-15)
    assert np.all(w[1:-1] < 0.0)


def test_smallest_comparison_C(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that the signs hold from the smallest constant upwards."""
    C_min = smallest_comparison_C(moving_shock, burgers)
    assert 0.1 <= C_min < 1.0
    u = np.linspace(0.1, 0.3, 1001)
    mu_minus, mu_plus = comparison_mus(moving_shock, C_min)
    assert np.all(residual_factor(moving_shock, burgers, mu_plus, u) > 0.0)
    assert np.all(residual_factor(moving_shock, burgers, mu_minus, u) < 0.0)


def test_check_sandwich_v2(
    v2: WaveProfile, moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that V2 lies between its comparison profiles."""
    report = check_sandwich_v2(moving_shock, burgers, v2)
    assert report.C_found == max(report.C_min, 1.0)
    assert report.max_K_plus_violation == 0.0
    assert report.max_K_minus_violation == 0.0
    assert report.ordering_ok
    assert report.mu_minus < moving_shock.lam**2 < report.mu_plus
    assert list(report.to_dict())[0] == "C_found"


def test_check_sandwich_v2_standing(
    standing_shock: ShockData, burgers: FluxModel
) -> None:
    """Test the trivial sandwich of a standing shock."""
    v2 = solve_v2(standing_shock, burgers)
    report = check_sandwich_v2(standing_shock, burgers, v2)
    assert report.ordering_ok
    assert report.max_ordering_violation == 0.0
