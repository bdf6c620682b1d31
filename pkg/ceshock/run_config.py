"""The RunConfig dataclass and parsing of run configuration files.

A configuration file is a YAML (or JSON) mapping with any of the keys below. Values
given on the command line take precedence over the file, which takes precedence over
the defaults in :mod:`ceshock.config`.

.. code-block:: yaml

    flux: quartic             # builtin name or coefficients, lowest degree first
    # flux_coeffs: [0, 0, 0.5] # ... or coefficients under their own key
    a: 1.5
    center: 0.2               # either center and delta ...
    delta: 0.1
    # u_minus: 0.3            # ... or both end states
    # u_plus: 0.1
    models: [v1, relaxation]
    rel_tol: 1.0e-12
    deltas: [0.4, 0.2, 0.1, 0.05, 0.025]
    norm: weighted
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, fields
from io import TextIOBase
from pathlib import Path
from typing import Any

import yaml
from schema import And, Or, Schema, SchemaError, Use
from schema import Optional as Opt

from ceshock import config
from ceshock.errors import ModelError
from ceshock.flux_model import (
    FluxModel,
    ShockData,
    get_flux,
    make_shock,
    polynomial_flux,
)
from ceshock.wave_solvers import OdeSettings


class ConfigError(ModelError):
    """A run configuration is invalid."""


_ENDPOINT_KEYS = ("u_minus", "u_plus")
_CENTERED_KEYS = ("center", "delta")


def _positive(name: str) -> And:
    return And(Use(float), lambda x: x > 0.0, error=f"{name} must be positive")


def _at_least_one(name: str) -> And:
    return And(int, lambda n: n >= 1, error=f"{name} must be a positive integer")


def _split(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


_listing = Or(And(str, Use(_split)), And(Or(list, tuple), Use(list)))
"""A list, tuple or comma-separated string, as a list."""


def _is_number(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True


_coefficient = Or(int, float, And(str, _is_number))

_config_schema = Schema(
    {
        Opt("flux"): Or(
            And(str, len),
            And([_coefficient], len, error="flux coefficients must not be empty"),
        ),
        Opt("flux_coeffs"): And(
            [_coefficient], len, error="flux_coeffs must not be empty"
        ),
        Opt("M"): _positive("M"),
        Opt("u_minus"): Use(float),
        Opt("u_plus"): Use(float),
        Opt("center"): Use(float),
        Opt("delta"): _positive("delta"),
        Opt("a"): _positive("a"),
        Opt("models"): And(
            _listing,
            [str],
            len,
            Use(tuple),
            error="models must be a non-empty list",
        ),
        Opt("rel_tol"): _positive("rel_tol"),
        Opt("abs_tol"): _positive("abs_tol"),
        Opt("x_max"): _positive("x_max"),
        Opt("dx"): _positive("dx"),
        Opt("tail_tol"): _positive("tail_tol"),
        Opt("deltas"): And(
            _listing,
            [_positive("deltas")],
            Use(tuple),
        ),
        Opt("norm"): Or("uniform", "weighted"),
        Opt("c"): _positive("c"),
        Opt("x_min"): _positive("x_min"),
        Opt("n_max"): _at_least_one("n_max"),
        Opt("jobs"): _at_least_one("jobs"),
        Opt("format"): Or("csv", "json"),
        Opt("out"): Use(Path),
    }
)
"""Schema for validating run configuration files."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs to know about the problem it is run on."""

    flux: str | tuple[float | str, ...] = "burgers"
    """Builtin flux name, or polynomial coefficients lowest degree first."""

    M: float = config.WORKING_BOUND
    """Half-width of the working interval of a polynomial flux."""

    u_minus: float | None = None
    u_plus: float | None = None
    center: float | None = None
    delta: float | None = None

    a: float = 1.0
    """Relaxation speed."""

    models: tuple[str, ...] = ("relaxation",)
    """Model tags."""

    rel_tol: float | None = None
    abs_tol: float | None = None
    x_max: float | None = None
    dx: float | None = None
    tail_tol: float | None = None

    deltas: tuple[float, ...] = ()
    """Shock strengths of a scaling study."""

    norm: str = "uniform"
    c: float | None = None
    x_min: float | None = None
    n_max: int = 12
    jobs: int = 1
    format: str = "csv"
    out: Path | None = None

    def __post_init__(self) -> None:
        """Check that the state is specified in exactly one way.

        Raises:
            ConfigError: The states are given both ways or only in part
        """
        endpoints = [getattr(self, k) is not None for k in _ENDPOINT_KEYS]
        centered = [getattr(self, k) is not None for k in _CENTERED_KEYS]
        if any(endpoints) and any(centered):
            raise ConfigError(
                "Give either u_minus and u_plus or center and delta, not both"
            )
        if any(endpoints) and not all(endpoints):
            raise ConfigError("u_minus and u_plus must be given together")
        if self.delta is not None and self.center is None:
            raise ConfigError("delta needs center")

    def flux_model(self) -> FluxModel:
        """Build the configured flux."""
        if isinstance(self.flux, str):
            return get_flux(self.flux)
        return polynomial_flux(self.flux, self.M)

    def states(self) -> tuple[float, float]:
        """Return (u_minus, u_plus).

        Raises:
            ConfigError: No state was configured
        """
        if self.u_minus is not None and self.u_plus is not None:
            return self.u_minus, self.u_plus
        if self.center is not None and self.delta is not None:
            return self.center + self.delta / 2, self.center - self.delta / 2
        raise ConfigError("No shock given: set u_minus and u_plus or center and delta")

    def shock(self, flux: FluxModel) -> ShockData:
        """Build the configured shock."""
        return make_shock(flux, *self.states(), self.a)

    def ode_settings(self, precise: bool = False) -> OdeSettings:
        """Build integrator settings from the configured overrides.

        Args:
            precise: Start from the tight tolerances of scaling studies
        Raises:
            SettingsError: An override is out of range
        """
        base = OdeSettings.precise() if precise else OdeSettings()
        return OdeSettings(
            rel_tol=self.rel_tol if self.rel_tol is not None else base.rel_tol,
            abs_tol=self.abs_tol if self.abs_tol is not None else base.abs_tol,
            x_max=self.x_max,
            tail_tol=self.tail_tol,
            grid_dx=self.dx,
        )


def validate_config(data: Any) -> dict[str, Any]:
    """Validate plain configuration data against the schema.

    Raises:
        ConfigError: The data is not a valid configuration
    """
    if data is None:
        return {}
    try:
        values = _config_schema.validate(data)
    except SchemaError as e:
        raise ConfigError(f"Invalid configuration: {e.code}") from e
    if "flux" in values and "flux_coeffs" in values:
        raise ConfigError("Give either flux or flux_coeffs, not both")
    return values


def parse_config(source: str | TextIOBase) -> dict[str, Any]:
    """Parse a configuration given as YAML or JSON text or stream.

    Raises:
        ConfigError: The contents are not valid
    """
    try:
        data = yaml.safe_load(source)
    except yaml.YAMLError as e:
        raise ConfigError(f"Configuration is not valid YAML or JSON: {e}") from e
    return validate_config(data)


def load_config_file(path: Path) -> dict[str, Any]:
    """Load and validate a configuration file.

    Raises:
        ConfigError: The file cannot be read or is not valid
    """
    logging.info(f"Loading run configuration from {path}")
    try:
        with path.open(encoding="utf-8") as file:
            return parse_config(file)
    except OSError as e:
        raise ConfigError(f"Could not read {path}: {e.strerror or e}") from e


def build_run_config(
    file_values: Mapping[str, Any], overrides: Mapping[str, Any]
) -> RunConfig:
    """Merge file values and command-line overrides into a RunConfig.

    Overrides that are None are ignored. A state given by the overrides replaces
    whichever way the file gives the states, and a flux replaces the file's flux or
    flux_coeffs.

    Raises:
        ConfigError: The merged configuration is invalid
    """
    given = {k: v for k, v in overrides.items() if v is not None}
    merged = dict(file_values)
    if any(k in given for k in _ENDPOINT_KEYS + _CENTERED_KEYS):
        for key in _ENDPOINT_KEYS + _CENTERED_KEYS:
            merged.pop(key, None)
    if "flux" in given:
        merged.pop("flux_coeffs", None)
    merged.update(given)

    values = validate_config(merged)
    if "flux_coeffs" in values:
        values["flux"] = values.pop("flux_coeffs")
    if isinstance(values.get("flux"), list):
        values["flux"] = tuple(values["flux"])
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in values.items() if k in known})
