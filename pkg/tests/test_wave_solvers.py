"""Tests for the first-order wave solvers and comparison profiles."""

import warnings
from contextlib import nullcontext as does_not_raise
from dataclasses import replace
from typing import Any

import numpy as np
import pytest

from ceshock.flux_model import FluxModel, ShockData, make_shock
from ceshock.wave_solvers import (
    PHI_MU_PATTERN,
    BracketError,
    DegenerateDiffusion,
    FluxMismatch,
    MarginError,
    OdeSettings,
    ProfileInvariantError,
    ProfileKind,
    SettingsError,
    WaveProfile,
    burgers_closed_form,
    burgers_phi_mu,
    check_sandwich,
    default_decay_rate,
    diffusion,
    invert_implicit,
    lemma_constants,
    phi_mu_tag,
    psi_profile,
    sandwich_mus,
    solve_first_order,
    solve_phi_mu,
    solve_relaxation,
    tail_decay_rate,
)


@pytest.mark.parametrize(
    "kwargs,raises",
    (
        ({}, does_not_raise()),
        ({"rel_tol": 1e-8, "abs_tol": 1e-10}, does_not_raise()),
        ({"rel_tol": 0.0}, pytest.raises(SettingsError)),
        ({"x_max": -1.0}, pytest.raises(SettingsError, match="x_max")),
        ({"rel_tol": 1e-12, "abs_tol": 1e-10}, pytest.raises(SettingsError)),
    ),
)
def test_ode_settings(kwargs: dict[str, float], raises: Any) -> None:
    """Test that integrator settings are range checked."""
    with raises:
        OdeSettings(**kwargs)


def test_ode_settings_precise() -> None:
    """Test the tight tolerances of scaling studies."""
    settings = OdeSettings.precise(grid_dx=0.1)
    assert settings.rel_tol == 1e-12
    assert settings.abs_tol == 1e-14
    assert settings.grid_dx == 0.1


def test_ode_settings_resolution(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test the grid rules derived from a shock."""
    settings = OdeSettings()
    assert settings.resolve_dx(moving_shock) == pytest.approx(0.025)
    assert settings.resolve_tail_tol(moving_shock) == pytest.approx(2.1e-14)
    assert settings.resolve_margin(moving_shock) == 0.5
    assert settings.resolve_x_max(moving_shock, burgers) >= 200.0

    xs = OdeSettings(x_max=10.0, grid_dx=0.5).grid(moving_shock, burgers)
    assert xs.size == 41
    assert xs[20] == 0.0
    np.testing.assert_array_equal(xs, -xs[::-1])


def test_diffusion(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test the diffusion coefficients of the first-order equations."""
    u = np.array([0.1, 0.3])
    relaxation = diffusion(moving_shock, burgers, ProfileKind.RELAXATION)
    np.testing.assert_allclose(relaxation(u), [0.96, 0.96])
    np.testing.assert_allclose(diffusion(moving_shock, burgers, "v1")(u), [0.98, 0.94])
    np.testing.assert_allclose(diffusion(moving_shock, burgers, "w1")(u), [0.99, 0.91])


@pytest.mark.parametrize("shock_name", ("moving_shock", "standing_shock"))
def test_relaxation_closed_form(
    shock_name: str, burgers: FluxModel, request: pytest.FixtureRequest
) -> None:
    """Test the relaxation wave of Burgers' flux against its closed form."""
    shock = request.getfixturevalue(shock_name)
    profile = solve_relaxation(shock, burgers)
    expected = burgers_closed_form(shock, burgers, profile.xs)
    assert np.max(np.abs(profile.us - expected)) < 1e-8
    assert profile.model_tag == "relaxation"
    assert profile.normalization_residual == pytest.approx(0.0, abs=1e-15)
    assert profile.tails_reached


@pytest.mark.parametrize("kind", ("relaxation", "v1", "w1"))
@pytest.mark.parametrize("u_minus", (0.05, 0.1, 0.4))
def test_odd_profiles(kind: str, u_minus: float, burgers: FluxModel) -> None:
    """Test that Burgers profiles of shocks with u_+ = -u_- are odd."""
    shock = make_shock(burgers, u_minus, -u_minus, 1.0)
    profile = solve_first_order(shock, burgers, kind)
    np.testing.assert_array_equal(profile.xs, -profile.xs[::-1])
    np.testing.assert_allclose(profile.us, -profile.us[::-1], rtol=0, atol=1e-9)


@pytest.mark.parametrize("kind", ("relaxation", "v1", "w1"))
def test_implicit_formula(kind: str, quartic: FluxModel) -> None:
    """Test profiles of a general flux against their implicit formula."""
    shock = make_shock(quartic, 0.3, 0.1, 1.0)
    profile = solve_first_order(shock, quartic, kind)
    for x in (-30.0, -5.0, 0.0, 5.0, 30.0):
        assert profile.at(x) == pytest.approx(
            invert_implicit(shock, quartic, kind, x), abs=1e-8
        )


@pytest.mark.parametrize("x", (-40.0, -35.0, 35.0, 40.0))
def test_implicit_formula_tails(
    x: float, moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test the implicit formula far from the centre without quadrature warnings."""
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        u = invert_implicit(moving_shock, burgers, "relaxation", x)
    expected = float(burgers_closed_form(moving_shock, burgers, x))
    assert u == pytest.approx(expected, abs=1e-10)


def test_invert_implicit_out_of_range(
    moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that the implicit formula cannot be inverted deep in the tail."""
    with pytest.raises(BracketError):
        invert_implicit(moving_shock, burgers, "relaxation", 1e4)


def test_degenerate_diffusion(burgers: FluxModel) -> None:
    """Test that a vanishing diffusion coefficient is reported."""
    shock = ShockData(0.3, 0.1, 0.2, 0.2)
    with pytest.raises(DegenerateDiffusion, match="not positive"):
        solve_relaxation(shock, burgers)


def test_phi_mu_closed_form(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test a comparison profile of Burgers' flux against its closed form."""
    profile = solve_phi_mu(moving_shock, burgers, 0.1)
    expected = burgers_phi_mu(moving_shock, burgers, 0.1, profile.xs)
    assert np.max(np.abs(profile.us - expected)) < 1e-8
    assert profile.model_tag == phi_mu_tag(0.1)
    match = PHI_MU_PATTERN.match(profile.model_tag)
    assert match is not None
    assert float(match["mu"]) == 0.1


def test_phi_mu_margin(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that mu must stay below a^2 - h."""
    with pytest.raises(MarginError):
        solve_phi_mu(moving_shock, burgers, 0.6)


def test_closed_form_other_flux(moving_shock: ShockData, quartic: FluxModel) -> None:
    """Test that the closed form refuses other fluxes."""
    with pytest.raises(FluxMismatch):
        burgers_closed_form(moving_shock, quartic, 0.0)


def test_psi_rescaling(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that comparison profiles are rescalings of psi."""
    mu = 0.1
    profile = solve_phi_mu(moving_shock, burgers, mu)
    psi = psi_profile(moving_shock, burgers, 500.0)
    inner = np.abs(profile.xs) <= 100.0
    xs = profile.xs[inner]
    rescaled = psi(xs / (moving_shock.a**2 - mu))
    assert np.max(np.abs(rescaled - profile.us[inner])) < 1e-8


@pytest.mark.parametrize(
    "kind,expected",
    (
        ("w1", (-0.03, 0.13)),
        ("v1", (-0.02, 0.10)),
        ("relaxation", (-0.02, 0.10)),
    ),
)
def test_sandwich_mus(
    kind: str,
    expected: tuple[float, float],
    moving_shock: ShockData,
    burgers: FluxModel,
) -> None:
    """Test the comparison parameters bracketing each wave."""
    assert sandwich_mus(moving_shock, burgers, kind) == pytest.approx(expected)


def test_sandwich_mus_margin(burgers: FluxModel) -> None:
    """Test that comparison parameters reaching a^2 are rejected."""
    shock = make_shock(burgers, 0.3, 0.1, 0.61)
    with pytest.raises(MarginError):
        sandwich_mus(shock, burgers, "w1", b=10.0)


@pytest.mark.parametrize("kind", ("relaxation", "v1", "w1"))
def test_check_sandwich(kind: str, moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that each first-order wave lies between its comparison profiles."""
    profile = solve_first_order(moving_shock, burgers, kind)
    report = check_sandwich(profile, burgers)
    assert report.ordering_ok
    assert report.width > 0.0
    assert report.mu_minus < report.mu_plus


def test_lemma_constants(moving_shock: ShockData, burgers: FluxModel) -> None:
    """Test that the comparison constant survives grid refinement."""
    constants = lemma_constants(moving_shock, burgers, [(0.0, 0.2)])
    assert constants.c == default_decay_rate(moving_shock)
    assert constants.C > 0.0
    assert constants.holds


@pytest.mark.parametrize(
    "kind,side,diffusion_at_end,slope",
    (
        ("relaxation", "right", 0.96, -0.1),
        ("relaxation", "left", 0.96, 0.1),
        ("v1", "right", 0.98, -0.1),
    ),
)
def test_tail_decay_rate(
    kind: str,
    side: str,
    diffusion_at_end: float,
    slope: float,
    moving_shock: ShockData,
    burgers: FluxModel,
) -> None:
    """Test that tails decay at the rate of the linearized equation."""
    profile = solve_first_order(moving_shock, burgers, kind, OdeSettings.precise())
    rate = tail_decay_rate(profile, side)
    assert rate == pytest.approx(slope / diffusion_at_end, rel=1e-3)


def test_tail_decay_rate_unresolved(
    moving_shock: ShockData, burgers: FluxModel
) -> None:
    """Test that a grid ending before the tail cannot be fitted."""
    profile = solve_relaxation(moving_shock, burgers, OdeSettings(x_max=20.0))
    assert not profile.tails_reached
    with pytest.raises(ProfileInvariantError, match="Too few points"):
        tail_decay_rate(profile)


def test_profile_at(standing_shock: ShockData, burgers: FluxModel) -> None:
    """Test evaluation of a profile off its grid."""
    profile = solve_relaxation(standing_shock, burgers, OdeSettings(x_max=60.0))
    assert profile.at(1e6) == -0.1
    assert profile.at(-1e6) == 0.1
    assert profile.at(0.0123) == pytest.approx(
        burgers_closed_form(standing_shock, burgers, 0.0123), abs=1e-9
    )


@pytest.mark.parametrize(
    "change,message",
    (
        ({"us": np.array([0.1, 0.0, 0.05])}, "not decreasing"),
        ({"us": np.array([0.2, 0.0, -0.1])}, "leaves"),
        ({"normalization_residual": 0.01}, "not normalized"),
        ({"xs": np.array([0.0, -1.0, 1.0])}, "not strictly increasing"),
    ),
)
def test_profile_validate(
    change: dict[str, Any], message: str, standing_shock: ShockData
) -> None:
    """Test that invalid profiles are rejected."""
    good = WaveProfile(
        "relaxation",
        np.array([-1.0, 0.0, 1.0]),
        np.array([0.1, 0.0, -0.1]),
        standing_shock,
        0.0,
    )
    good.validate()
    with pytest.raises(ProfileInvariantError, match=message):
        replace(good, **change).validate()


def test_to_metadata(standing_shock: ShockData, burgers: FluxModel) -> None:
    """Test the metadata of a profile."""
    settings = OdeSettings(x_max=60.0)
    profile = solve_relaxation(standing_shock, burgers, settings)
    metadata = profile.to_metadata()
    assert metadata["model_tag"] == "relaxation"
    assert metadata["flux"] == "burgers"
    assert metadata["shock"] == standing_shock.to_dict()
    assert metadata["settings"]["x_max"] == 60.0
    assert metadata["points"] == profile.xs.size
