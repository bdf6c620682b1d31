"""Error profiles between waves, their norms and convergence-order fits."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np

from ceshock import config
from ceshock.errors import ModelError, SolverError
from ceshock.flux_model import FluxModel, ShockData, make_shock
from ceshock.second_order import ShootingSettings, solve_v2
from ceshock.wave_solvers import (
    PHI_MU_PATTERN,
    OdeSettings,
    ProfileInvariantError,
    ProfileKind,
    WaveProfile,
    comparison_profile,
    default_decay_rate,
    sandwich_mus,
    solve_first_order,
    solve_phi_mu,
)


class ShockMismatch(ModelError):
    """Two profiles connect different shocks."""


class InsufficientData(SolverError):
    """Too few successful points remain for a scaling fit."""


class NormRegionError(SolverError):
    """The error near x = 0 is not bounded by its slope."""


class NormKind(StrEnum):
    """Norms of an error profile."""

    UNIFORM = "uniform"
    WEIGHTED = "weighted"


MODEL_TAGS = ("relaxation", "v1", "w1", "v2")
"""Model tags accepted besides phi_mu(<mu>)."""


def solve_model(
    tag: str,
    shock: ShockData,
    flux: FluxModel,
    settings: OdeSettings | None = None,
    shooting: ShootingSettings | None = None,
) -> WaveProfile:
    """Compute the profile named by a model tag.

    Raises:
        ModelError: The tag is not recognised
    """
    if tag == "v2":
        return solve_v2(shock, flux, shooting, settings)
    if match := PHI_MU_PATTERN.match(tag):
        return solve_phi_mu(shock, flux, float(match["mu"]), settings)
    if tag in {kind.value for kind in ProfileKind}:
        return solve_first_order(shock, flux, tag, settings)
    raise ModelError(
        f"Unknown model {tag!r}; choose from {', '.join(MODEL_TAGS)} or phi_mu(<mu>)"
    )


def _same_shock(first: ShockData, second: ShockData) -> bool:
    return (
        first.u_minus == second.u_minus
        and first.u_plus == second.u_plus
        and first.a == second.a
        and bool(np.isclose(first.lam, second.lam, rtol=1e-12, atol=1e-15))
    )


@dataclass(frozen=True, eq=False)
class ErrorProfile:
    """Pointwise distance between two profiles of the same shock."""

    xs: np.ndarray
    """Positions."""

    diffs: np.ndarray
    """|u_A(x) - u_B(x)|."""

    model_pair: tuple[str, str]
    """Tags of the two profiles."""

    shock: ShockData
    """The shared shock."""

    @property
    def dx(self) -> float:
        """Grid spacing."""
        return float(self.xs[1] - self.xs[0])


def error_profile(a: WaveProfile, b: WaveProfile) -> ErrorProfile:
    """Compute |a - b| on the grid of ``a``.

    ``b`` is resampled by monotone cubic interpolation when its grid differs.

    Raises:
        ShockMismatch: The profiles connect different shocks
        ProfileInvariantError: The profiles disagree at x = 0
    """
    if not _same_shock(a.shock, b.shock):
        raise ShockMismatch(
            f"Profiles {a.model_tag} and {b.model_tag} connect different shocks"
        )
    if a.xs.shape == b.xs.shape and np.array_equal(a.xs, b.xs):
        other = b.us
    else:
        logging.debug(f"Resampling {b.model_tag} onto the grid of {a.model_tag}")
        other = b.at(a.xs)
    diffs = np.abs(a.us - other)

    centre = int(np.argmin(np.abs(a.xs)))
    if a.xs[centre] == 0.0 and diffs[centre] > config.NORMALIZATION_TOL * a.shock.delta:
        raise ProfileInvariantError(
            f"Profiles {a.model_tag} and {b.model_tag} differ at x = 0"
        )
    return ErrorProfile(a.xs, diffs, (a.model_tag, b.model_tag), a.shock)


def uniform_norm(e: ErrorProfile) -> float:
    """Largest pointwise difference."""
    return float(np.max(e.diffs))


def weighted_norm(
    e: ErrorProfile, c: float | None = None, x_min: float | None = None
) -> float:
    """Sup over |x| >= x_min of diffs(x) / (|x| exp(-c delta |x|)).

    Inside |x| < x_min the error must instead stay below the slope the weighted
    ratio has just outside that region.

    Args:
        e: The error profile
        c: Decay rate of the weight, 1 / (3 a^2) by default
        x_min: Radius of the excluded region, one grid cell by default
    Raises:
        ModelError: c or x_min is not positive
        NormRegionError: The error near x = 0 exceeds its slope bound
    """
    c = default_decay_rate(e.shock) if c is None else c
    x_min = e.dx if x_min is None else x_min
    if not (c > 0.0 and x_min > 0.0):
        raise ModelError(f"c and x_min must be positive, got c={c:g}, x_min={x_min:g}")

    r = np.abs(e.xs)
    outer = r >= x_min * (1.0 - 1e-9)
    if not np.any(outer):
        raise ModelError(f"x_min = {x_min:g} excludes the whole grid")
    ratio = e.diffs[outer] / (r[outer] * np.exp(-c * e.shock.delta * r[outer]))

    inner = ~outer
    near = outer & (r <= 2.0 * x_min)
    slope = float(np.max(e.diffs[near] / r[near])) if np.any(near) else 0.0
    slack = config.NORMALIZATION_TOL * e.shock.delta
    if np.any(e.diffs[inner] > slope * r[inner] + slack):
        raise NormRegionError(
            f"Error of {e.model_pair} near x = 0 exceeds its slope bound"
        )
    return float(np.max(ratio))


def compute_norm(
    e: ErrorProfile,
    kind: NormKind | str,
    c: float | None = None,
    x_min: float | None = None,
) -> float:
    """Evaluate a norm of an error profile by kind."""
    if NormKind(kind) == NormKind.UNIFORM:
        return uniform_norm(e)
    return weighted_norm(e, c, x_min)


def sandwich_bound(
    shock: ShockData,
    flux: FluxModel,
    kind: ProfileKind | str,
    settings: OdeSettings | None = None,
) -> float:
    """Uniform distance between the two comparison profiles around a wave.

    Both the wave and the relaxation wave lie between them, so this bounds their
    uniform distance a priori.
    """
    settings = settings or OdeSettings()
    mu_minus, mu_plus = sandwich_mus(shock, flux, kind)
    lower = comparison_profile(shock, flux, mu_minus, settings)
    upper = comparison_profile(shock, flux, mu_plus, settings)
    return float(np.max(np.abs(upper.us - lower.us)))


def fit_exponent(
    deltas: Sequence[float], norms: Sequence[float]
) -> tuple[float, float]:
    """Least-squares slope of log norm against log delta.

    >>> slope, residual = fit_exponent([4, 2, 1, 0.5], [16, 4, 1, 0.25])
    >>> round(slope, 12), residual < 1e-12
    (2.0, True)

    Returns:
        The slope and the root-mean-square residual of the fit
    Raises:
        ModelError: Fewer than two points or a non-positive value
    """
    x, y = np.asarray(deltas, dtype=float), np.asarray(norms, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise ModelError("A fit needs at least two (delta, norm) pairs")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ModelError("Deltas and norms must be positive for a log-log fit")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    residual = np.log(y) - (slope * np.log(x) + intercept)
    return float(slope), float(np.sqrt(np.mean(residual**2)))


@dataclass(frozen=True)
class ScalingReport:
    """Norms of one error over a sequence of shock strengths, with their fit."""

    deltas: tuple[float, ...]
    """Shock strengths, strictly decreasing."""

    norms: tuple[float, ...]
    """One norm per strength, NaN where the computation failed."""

    fitted_exponent: float
    """Least-squares slope of log norm against log delta."""

    fit_residual: float
    """Root-mean-square residual of the fit."""

    norm_kind: NormKind
    """The norm used."""

    model_pair: tuple[str, str]
    """Tags of the compared models."""

    failures: dict[float, str] = field(default_factory=dict)
    """Error messages of failed strengths."""

    def to_dict(self) -> dict[str, Any]:
        """Get the JSON representation, with failed norms as null."""
        return {
            "deltas": list(self.deltas),
            "norms": [None if np.isnan(n) else n for n in self.norms],
            "fitted_exponent": self.fitted_exponent,
            "fit_residual": self.fit_residual,
            "norm_kind": str(self.norm_kind),
            "model_pair": list(self.model_pair),
            "failures": {f"{d:.17g}": msg for d, msg in self.failures.items()},
        }

    def rows(self) -> list[tuple[float, float, str]]:
        """Get CSV rows (delta, norm, status)."""
        return [
            (d, n, "failed" if d in self.failures else "ok")
            for d, n in zip(self.deltas, self.norms)
        ]


def _check_deltas(deltas: Sequence[float]) -> None:
    if len(deltas) < config.MIN_SCALING_POINTS:
        raise ModelError(
            f"A scaling study needs at least {config.MIN_SCALING_POINTS} deltas, "
            f"got {len(deltas)}"
        )
    if any(d <= 0.0 for d in deltas) or any(
        later >= earlier for earlier, later in zip(deltas, deltas[1:])
    ):
        raise ModelError("Deltas must be positive and strictly decreasing")


def scaling_fit(
    flux: FluxModel,
    a: float,
    center: float,
    deltas: Sequence[float],
    model_pair: tuple[str, str],
    norm_kind: NormKind | str,
    c: float | None = None,
    x_min: float | None = None,
    settings: OdeSettings | None = None,
    workers: int = 1,
) -> ScalingReport:
    """Measure how the distance between two models scales with shock strength.

    Shocks are centred, u_+/- = center -/+ delta / 2, so lambda varies with delta
    for a general flux. A strength whose computation fails is recorded and left out
    of the fit.

    Args:
        flux: The flux function
        a: Relaxation speed
        center: Midpoint of every shock
        deltas: Strictly decreasing strengths, at least four
        model_pair: Tags of the two compared models
        norm_kind: uniform or weighted
        c: Decay rate of the weighted norm
        x_min: Radius of the region excluded from the weighted norm
        settings: Integrator settings, tight tolerances by default
        workers: Number of strengths computed concurrently
    Raises:
        ModelError: Fewer than four deltas or deltas not decreasing
        InsufficientData: Fewer than four strengths succeeded
    """
    _check_deltas(deltas)
    kind = NormKind(norm_kind)
    settings = settings or OdeSettings.precise()

    def point(delta: float) -> float | str:
        try:
            shock = make_shock(flux, center + delta / 2, center - delta / 2, a)
            first = solve_model(model_pair[0], shock, flux, settings)
            second = solve_model(model_pair[1], shock, flux, settings)
            norm = compute_norm(error_profile(first, second), kind, c, x_min)
        except (ModelError, SolverError) as e:
            logging.warning(f"Scaling point delta = {delta:g} failed: {e}")
            return str(e)
        logging.info(f"{kind} norm of {model_pair} at delta = {delta:g}: {norm:.6g}")
        return norm

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(point, deltas))
    else:
        results = [point(d) for d in deltas]

    failures = {d: r for d, r in zip(deltas, results) if isinstance(r, str)}
    norms = tuple(np.nan if isinstance(r, str) else r for r in results)
    good = [(d, n) for d, n in zip(deltas, norms) if not np.isnan(n) and n > 0.0]
    if len(good) < config.MIN_SCALING_POINTS:
        raise InsufficientData(
            f"Only {len(good)} of {len(deltas)} strengths gave a positive norm"
        )
    exponent, residual = fit_exponent(*zip(*good))
    return ScalingReport(
        tuple(map(float, deltas)),
        norms,
        exponent,
        residual,
        kind,
        (model_pair[0], model_pair[1]),
        failures,
    )
