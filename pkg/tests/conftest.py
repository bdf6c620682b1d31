"""Configuration for pytest."""

import pytest

from ceshock.flux_model import FluxModel, ShockData, get_flux, make_shock


@pytest.fixture
def burgers() -> FluxModel:
    """Fixture for Burgers' flux."""
    return get_flux("burgers")


@pytest.fixture
def quartic() -> FluxModel:
    """Fixture for the quartic flux u^2 / 2 + u^4 / 12."""
    return get_flux("quartic")


@pytest.fixture
def exponential() -> FluxModel:
    """Fixture for the flux exp(u)."""
    return get_flux("exponential")


@pytest.fixture
def moving_shock(burgers: FluxModel) -> ShockData:
    """A Burgers shock from 0.3 to 0.1 with speed 0.2."""
    return make_shock(burgers, 0.3, 0.1, 1.0)


@pytest.fixture
def standing_shock(burgers: FluxModel) -> ShockData:
    """A Burgers shock from 0.1 to -0.1 with speed 0."""
    return make_shock(burgers, 0.1, -0.1, 1.0)
