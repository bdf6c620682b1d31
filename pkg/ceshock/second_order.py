"""The second-order Chapman-Enskog traveling wave V2.

V2 solves Q2 u = P(u) with Q1 u = (a^2 - lambda f'(u)) u' and Q2 u = Q1 u + lambda
(Q1 u)'. In the phase variable w = Q1 u this is the planar system

    u' = w l(u),    lambda w' = P(u) - w,    l(u) = 1 / (a^2 - lambda f'(u)),

whose end states are a saddle and a node. The wave is the trajectory leaving the
saddle, traced with u as the independent variable:

    dw/du = (P(u) - w) / (lambda l(u) w),    dx/du = 1 / (w l(u)).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import StrEnum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.special import expit

from ceshock import config
from ceshock.errors import SolverError
from ceshock.flux_model import (
    FluxModel,
    ShockData,
    chord_P,
    chord_P_prime,
    mirror_shock,
)
from ceshock.wave_solvers import (
    OdeSettings,
    SettingsError,
    WaveProfile,
    comparison_profile,
    make_profile,
    ordering_tolerance,
    ordering_violation,
    solve_relaxation,
)


class DiscriminantError(SolverError):
    """The linearization at an end state has complex eigenvalues."""


class TrajectoryEscape(SolverError):
    """The shooting trajectory left the strip between the end states."""


class SignError(SolverError):
    """No comparison constant in the search range gives the required signs."""


class Endpoint(StrEnum):
    """End states of a shock."""

    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class PhasePoint:
    """A point (u, w = Q1 u) of the phase plane."""

    u: float
    w: float


@dataclass(frozen=True)
class ShootingSettings:
    """Parameters of the phase-plane shooting."""

    eta: float = config.SADDLE_OFFSET
    """Offset of the start point from the saddle, as a fraction of delta."""

    u_steps: int = config.SHOOTING_STEPS
    """Number of nodes at which the trajectory is sampled."""

    comparison_C: float = config.COMPARISON_C
    """Constant C of the comparison parameters mu = lambda^2 (1 +/- C delta^2)."""

    def __post_init__(self) -> None:
        """Check that the settings are in range.

        Raises:
            SettingsError: A value is out of range
        """
        if not 0.0 < self.eta < 0.25:
            raise SettingsError(f"eta must lie in (0, 1/4), got {self.eta}")
        if self.u_steps < 5:
            raise SettingsError(f"u_steps must be at least 5, got {self.u_steps}")
        if not self.comparison_C > 0.0:
            raise SettingsError("comparison_C must be positive")


@dataclass(frozen=True, eq=False)
class PhaseCurve:
    """Samples of the V2 trajectory ordered by decreasing u."""

    us: np.ndarray
    """States."""

    ws: np.ndarray
    """Phase variable w = Q1 u."""

    xs: np.ndarray
    """Positions, with the midpoint at x = 0."""

    def points(self) -> list[PhasePoint]:
        """Get the samples as phase points."""
        return [PhasePoint(float(u), float(w)) for u, w in zip(self.us, self.ws)]


def ell(shock: ShockData, flux: FluxModel, u: ArrayLike) -> Any:
    """Evaluate l(u) = 1 / (a^2 - lambda f'(u))."""
    return 1.0 / (shock.a**2 - shock.lam * flux.eval_f1(u))


def _slope(lam: float, dp: float, l_e: float) -> float:
    discriminant = 1.0 + 4.0 * lam * l_e * dp
    if discriminant < 0.0:
        raise DiscriminantError(
            "Linearization has complex eigenvalues; the shock is too strong"
        )
    return 2.0 * dp / (1.0 + np.sqrt(discriminant))


def saddle_slope(shock: ShockData, flux: FluxModel, endpoint: Endpoint | str) -> float:
    """Slope s of the trajectory w ~ s (u - u_e) at an end state.

    s is the root of lambda l s^2 + s - P'(u_e) = 0 that tends to P'(u_e) as lambda
    goes to 0.

    Raises:
        DiscriminantError: 1 + 4 lambda l P' < 0
    """
    u_e = shock.u_minus if Endpoint(endpoint) == Endpoint.LEFT else shock.u_plus
    return _slope(
        shock.lam,
        chord_P_prime(shock, flux, u_e),
        float(ell(shock, flux, u_e)),
    )


def _shooting_nodes(shock: ShockData, n: int, eta: float) -> np.ndarray:
    """Nodes in (u_+, u_-), uniform in the logistic variable, increasing."""
    n += 1 - n % 2
    z_max = np.log((1.0 - eta) / eta)
    nodes = shock.u_plus + shock.delta * expit(np.linspace(-z_max, z_max, n))
    nodes[0] = shock.u_plus + eta * shock.delta
    nodes[-1] = shock.u_minus - eta * shock.delta
    nodes[n // 2] = shock.midpoint
    return nodes


def _trace(
    shock: ShockData,
    flux: FluxModel,
    settings: ShootingSettings,
    ode: OdeSettings,
) -> PhaseCurve:
    """Trace the trajectory leaving the saddle.

    The saddle is u_- when lambda > 0 and u_+ when lambda < 0; the trajectory is
    integrated from it towards the node.
    """
    lam = shock.lam
    nodes = _shooting_nodes(shock, settings.u_steps, settings.eta)
    if chord_P_prime(shock, flux, shock.u_minus) * lam > 0.0:
        saddle, nodes = Endpoint.LEFT, nodes[::-1]
    elif chord_P_prime(shock, flux, shock.u_plus) * lam > 0.0:
        saddle = Endpoint.RIGHT
    else:
        raise TrajectoryEscape("Neither end state is a saddle")

    u_saddle = shock.u_minus if saddle == Endpoint.LEFT else shock.u_plus
    w_start = saddle_slope(shock, flux, saddle) * (nodes[0] - u_saddle)

    def rhs(u: float, y: np.ndarray) -> list[float]:
        w = y[0]
        l_u = float(ell(shock, flux, u))
        return [(chord_P(shock, flux, u) - w) / (lam * l_u * w), 1.0 / (w * l_u)]

    def crossed_axis(_: float, y: np.ndarray) -> float:
        return y[0]

    crossed_axis.terminal = True  # type: ignore[attr-defined]

    result = solve_ivp(
        rhs,
        (nodes[0], nodes[-1]),
        [w_start, 0.0],
        method="RK45",
        t_eval=nodes,
        events=crossed_axis,
        rtol=ode.rel_tol,
        atol=[ode.abs_tol * shock.delta, ode.abs_tol],
    )
    if result.status != 0 or result.t.size != nodes.size:
        raise TrajectoryEscape(
            f"Shooting trajectory escaped before the far end state ({result.message})"
        )

    ws, xs = result.y[0], result.y[1]
    if not np.all(ws < 0.0):
        raise TrajectoryEscape("Phase variable w left the lower half plane")
    xs -= xs[np.argmin(np.abs(nodes - shock.midpoint))]

    # Reorder by decreasing u, i.e. increasing x
    order = np.argsort(-nodes)
    curve = PhaseCurve(nodes[order], ws[order], xs[order])
    if not np.all(np.diff(curve.xs) > 0.0):
        raise TrajectoryEscape("Recovered positions are not monotone in u")
    logging.debug(f"Traced V2 trajectory in {result.nfev} evaluations")
    return curve


def trace_phase_curve(
    shock: ShockData,
    flux: FluxModel,
    settings: ShootingSettings | None = None,
    ode: OdeSettings | None = None,
) -> PhaseCurve:
    """Trace the V2 trajectory in the (u, w) plane.

    Raises:
        TrajectoryEscape: The trajectory does not reach the far end state
        DiscriminantError: The saddle linearization is degenerate
    """
    if shock.lam == 0.0:
        raise TrajectoryEscape("The phase plane degenerates when lambda = 0")
    return _trace(shock, flux, settings or ShootingSettings(), ode or OdeSettings())


def _resample(
    curve: PhaseCurve, shock: ShockData, flux: FluxModel, xs: np.ndarray
) -> np.ndarray:
    """Evaluate the traced wave on a grid, with exponential tails beyond the nodes."""
    slopes = curve.ws * ell(shock, flux, curve.us)
    spline = CubicHermiteSpline(curve.xs, curve.us, slopes)
    out = np.empty_like(xs)

    inside = (xs >= curve.xs[0]) & (xs <= curve.xs[-1])
    out[inside] = spline(xs[inside])

    rate_left = saddle_slope(shock, flux, Endpoint.LEFT) * ell(
        shock, flux, shock.u_minus
    )
    before = xs < curve.xs[0]
    out[before] = shock.u_minus - (shock.u_minus - curve.us[0]) * np.exp(
        rate_left * (xs[before] - curve.xs[0])
    )

    rate_right = saddle_slope(shock, flux, Endpoint.RIGHT) * ell(
        shock, flux, shock.u_plus
    )
    after = xs > curve.xs[-1]
    out[after] = shock.u_plus + (curve.us[-1] - shock.u_plus) * np.exp(
        rate_right * (xs[after] - curve.xs[-1])
    )
    return out


def solve_v2(
    shock: ShockData,
    flux: FluxModel,
    settings: ShootingSettings | None = None,
    ode: OdeSettings | None = None,
) -> WaveProfile:
    """Compute the second-order wave V2 by shooting from the saddle.

    For lambda = 0 the wave equation reduces to the relaxation one and u_* is
    returned.

    Raises:
        TrajectoryEscape: The trajectory does not reach the far end state
        DiscriminantError: The linearization at an end state is degenerate
    """
    settings = settings or ShootingSettings()
    ode = ode or OdeSettings()
    if shock.lam == 0.0:
        return replace(solve_relaxation(shock, flux, ode), model_tag="v2")
    curve = _trace(shock, flux, settings, ode)
    xs = ode.grid(shock, flux)
    return make_profile("v2", xs, _resample(curve, shock, flux, xs), shock, flux, ode)


def reversal_discrepancy(
    shock: ShockData,
    flux: FluxModel,
    settings: ShootingSettings | None = None,
    ode: OdeSettings | None = None,
) -> float:
    """Sup distance between V2 and the reflection of V2 for the mirrored problem.

    The mirrored problem has the flux u -> f(-u) and the speed -lambda, so its saddle
    sits at the other end state. Its wave v gives -v(-x) on the original grid.
    """
    settings = settings or ShootingSettings()
    ode = ode or OdeSettings()
    if shock.lam == 0.0:
        return 0.0
    direct = solve_v2(shock, flux, settings, ode)
    mirror, mirrored_flux = mirror_shock(shock, flux)
    reflected = -solve_v2(mirror, mirrored_flux, settings, ode).at(-direct.xs)
    return float(np.max(np.abs(direct.us - reflected)))


def reference_curve(
    shock: ShockData, flux: FluxModel, mu: float, u: ArrayLike
) -> Any:
    """Evaluate w_mu(u) = Q1 phi_mu along the comparison profile phi_mu."""
    return chord_P(shock, flux, u) / (ell(shock, flux, u) * (shock.a**2 - mu))


def comparison_mus(shock: ShockData, C: float) -> tuple[float, float]:
    """Return (mu_-, mu_+) = lambda^2 (1 -/+ C delta^2)."""
    lam2, spread = shock.lam**2, C * shock.delta**2
    return lam2 * (1.0 - spread), lam2 * (1.0 + spread)


@dataclass(frozen=True)
class SandwichV2Report:
    """Result of checking V2 against the comparison profiles phi_mu+/-."""

    C_found: float
    """Comparison constant used for the ordering check."""

    C_min: float
    """Smallest constant in the search range for which the signs hold."""

    max_K_plus_violation: float
    """Largest failure of K+ > 0 at C_found."""

    max_K_minus_violation: float
    """Largest failure of K- < 0 at C_found."""

    ordering_ok: bool
    """Whether phi_mu+ and phi_mu- sandwich V2."""

    mu_plus: float
    """Inner comparison parameter."""

    mu_minus: float
    """Outer comparison parameter."""

    max_ordering_violation: float
    """Largest signed overlap of the sandwich; negative when strict."""

    def to_dict(self) -> dict[str, Any]:
        """Get a plain representation for JSON output."""
        return {
            "C_found": self.C_found,
            "max_K_plus_violation": self.max_K_plus_violation,
            "max_K_minus_violation": self.max_K_minus_violation,
            "ordering_ok": self.ordering_ok,
            "C_min": self.C_min,
            "mu_plus": self.mu_plus,
            "mu_minus": self.mu_minus,
            "max_ordering_violation": self.max_ordering_violation,
        }


def residual_factor(shock: ShockData, flux: FluxModel, mu: float, u: ArrayLike) -> Any:
    """Evaluate K with Q2 phi_mu = P(phi_mu) (1 + K(phi_mu)).

    K = c (1 + d P') - d^2 (P'^2 + P f''), c = (mu - lambda^2) / (a^2 - mu) and
    d = lambda / (a^2 - mu).
    """
    gap = shock.a**2 - mu
    c, d = (mu - shock.lam**2) / gap, shock.lam / gap
    p = chord_P(shock, flux, u)
    dp = chord_P_prime(shock, flux, u)
    return c * (1.0 + d * dp) - d**2 * (dp**2 + p * flux.eval_f2(u))


def _signs_hold(shock: ShockData, flux: FluxModel, C: float, u: np.ndarray) -> bool:
    mu_minus, mu_plus = comparison_mus(shock, C)
    return bool(
        np.all(residual_factor(shock, flux, mu_plus, u) > 0.0)
        and np.all(residual_factor(shock, flux, mu_minus, u) < 0.0)
    )


def smallest_comparison_C(shock: ShockData, flux: FluxModel) -> float:
    """Find the smallest C in the search range for which K+ > 0 and K- < 0.

    The admissible set of C is closed upwards, so it is bracketed by bisection in
    log C and the upper end of the final bracket is returned.

    Raises:
        SignError: The signs fail even at the top of the range
    """
    u = np.linspace(shock.u_plus, shock.u_minus, config.SIGN_GRID_POINTS)
    lo, hi = config.COMPARISON_C_RANGE
    if _signs_hold(shock, flux, lo, u):
        return lo
    if not _signs_hold(shock, flux, hi, u):
        raise SignError(f"No comparison constant up to {hi:g} gives the required signs")
    while hi / lo > 1.0 + config.COMPARISON_C_PRECISION:
        mid = np.sqrt(lo * hi)
        lo, hi = (lo, mid) if _signs_hold(shock, flux, mid, u) else (mid, hi)
    return float(hi)


def check_sandwich_v2(
    shock: ShockData,
    flux: FluxModel,
    v2: WaveProfile,
    settings: ShootingSettings | None = None,
) -> SandwichV2Report:
    """Check the sign conditions and the comparison sandwich of V2.

    The constant used is the configured comparison_C, raised to the smallest
    admissible value when the signs fail there.

    Raises:
        SignError: No C in the search range gives the required signs
    """
    settings = settings or ShootingSettings()
    if shock.lam == 0.0:
        low = config.COMPARISON_C_RANGE[0]
        return SandwichV2Report(low, low, 0.0, 0.0, True, 0.0, 0.0, 0.0)

    C_min = smallest_comparison_C(shock, flux)
    C = max(C_min, settings.comparison_C)
    mu_minus, mu_plus = comparison_mus(shock, C)
    u = np.linspace(shock.u_plus, shock.u_minus, config.SIGN_GRID_POINTS)
    k_plus = residual_factor(shock, flux, mu_plus, u)
    k_minus = residual_factor(shock, flux, mu_minus, u)

    lower = comparison_profile(shock, flux, mu_minus, v2.settings)
    upper = comparison_profile(shock, flux, mu_plus, v2.settings)
    violation = ordering_violation(lower, v2, upper)
    report = SandwichV2Report(
        C,
        C_min,
        max(0.0, -float(np.min(k_plus))),
        max(0.0, float(np.max(k_minus))),
        violation <= ordering_tolerance(shock, v2.settings),
        mu_plus,
        mu_minus,
        violation,
    )
    logging.info(f"V2 sandwich: {report.to_dict()}")
    return report


def v2_residual(shock: ShockData, flux: FluxModel, profile: WaveProfile) -> float:
    """Sup norm of Q2 u - P(u) with derivatives by centered differences."""
    dx = profile.dx
    us = profile.us
    du = (us[2:] - us[:-2]) / (2.0 * dx)
    w = du / ell(shock, flux, us[1:-1])
    dw = (w[2:] - w[:-2]) / (2.0 * dx)
    residual = w[1:-1] + shock.lam * dw - chord_P(shock, flux, us[2:-2])
    return float(np.max(np.abs(residual)))
