"""Flux functions, shock data and the chord function P.

Every profile equation in the package shares the right-hand side

    P(u) = f(u) - f(u_-) - lambda (u - u_-)

which vanishes at both end states and is negative between them for a strictly convex
flux.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cache, cached_property
from typing import Any

import numpy as np
import sympy
from frozendict import frozendict
from numpy.typing import ArrayLike

from ceshock import config
from ceshock.errors import ModelError

U = sympy.Symbol("u", real=True)
"""The state variable of every symbolic flux."""

ScalarFunction = Callable[[Any], Any]


class ConvexityError(ModelError):
    """The flux is not strictly convex on its working interval."""


class AdmissibilityError(ModelError):
    """The end states violate u_minus > u_plus."""

    def __init__(self, u_minus: float, u_plus: float) -> None:
        """Create a new AdmissibilityError.

        Args:
            u_minus: The left state
            u_plus: The right state
        """
        super().__init__(
            f"Shock ({u_minus}, {u_plus}) is not admissible: "
            "u_minus must be greater than u_plus"
        )


class SubcharacteristicError(ModelError):
    """The relaxation speed does not dominate |f'| on the padded shock interval."""


class WorkingIntervalError(ModelError):
    """An end state lies outside the flux's working interval."""


def exact(value: float | str | sympy.Rational) -> sympy.Rational:
    """Convert a number to an exact rational through its shortest decimal form.

    >>> exact(0.1)
    1/10
    """
    if isinstance(value, sympy.Rational):
        return value
    if isinstance(value, str):
        return sympy.Rational(value)
    return sympy.Rational(repr(float(value)))


def _lambdify(expression: sympy.Expr) -> ScalarFunction:
    """Turn an expression in u into a numpy function.

    Constant expressions are broadcast to the shape of the argument and scalar
    arguments give Python floats.
    """
    raw = sympy.lambdify(U, expression, modules="numpy")

    def evaluate(u: ArrayLike) -> Any:
        u_arr = np.asarray(u, dtype=float)
        out = np.broadcast_to(np.asarray(raw(u_arr), dtype=float), u_arr.shape)
        return float(out) if out.ndim == 0 else out.copy()

    return evaluate


@dataclass(frozen=True)
class FluxModel:
    """A strictly convex flux with its first two derivatives."""

    name: str
    """Identifier used on the command line and in metadata."""

    eval_f: ScalarFunction
    """u -> f(u)."""

    eval_f1: ScalarFunction
    """u -> f'(u)."""

    eval_f2: ScalarFunction
    """u -> f''(u)."""

    convexity_bound: float
    """Infimum of f'' over the sampled working interval."""

    M: float
    """Half-width of the working interval [-M, M]."""

    expression: sympy.Expr | None = None
    """Exact symbolic form of f in :data:`U`, if known."""

    @classmethod
    def from_expression(
        cls, name: str, expression: sympy.Expr, M: float = config.WORKING_BOUND
    ) -> FluxModel:
        """Build a flux from a sympy expression in :data:`U`.

        Args:
            name: Identifier of the flux
            expression: f(u)
            M: Half-width of the working interval
        Raises:
            ConvexityError: f'' is not positive on [-M, M]
        """
        f1 = sympy.diff(expression, U)
        return cls.from_callables(
            name,
            _lambdify(expression),
            _lambdify(f1),
            _lambdify(sympy.diff(f1, U)),
            M,
            expression,
        )

    @classmethod
    def from_callables(
        cls,
        name: str,
        f: ScalarFunction,
        f1: ScalarFunction,
        f2: ScalarFunction,
        M: float,
        expression: sympy.Expr | None = None,
    ) -> FluxModel:
        """Build a flux from numeric callables, certifying convexity and f'.

        Raises:
            ModelError: The working interval is empty or f' does not match f
            ConvexityError: f'' is not positive on [-M, M]
        """
        if not M > 0.0:
            raise ModelError(f"Working interval half-width must be positive, got {M}")

        grid = np.linspace(-M, M, config.CONVEXITY_SAMPLES)
        bound = float(np.min(f2(grid)))
        if not bound > 0.0:
            raise ConvexityError(
                f"Flux {name} is not strictly convex on [-{M}, {M}] "
                f"(min f'' = {bound:g})"
            )

        grid = np.linspace(-M, M, config.DERIVATIVE_CHECK_SAMPLES)
        h = 1e-5 * max(1.0, M)
        slope = f1(grid)
        fd = (f(grid + h) - f(grid - h)) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(slope))))
        if not np.allclose(
            fd,
            slope,
            rtol=config.DERIVATIVE_CHECK_RTOL,
            atol=config.DERIVATIVE_CHECK_RTOL * scale,
        ):
            raise ModelError(f"Supplied derivative of flux {name} does not match f")

        return cls(name, f, f1, f2, bound, float(M), expression)

    @cached_property
    def is_polynomial(self) -> bool:
        """Whether f is a polynomial with a known exact form."""
        return self.expression is not None and bool(self.expression.is_polynomial(U))

    @cached_property
    def is_burgers(self) -> bool:
        """Whether f is exactly u^2 / 2."""
        return (
            self.expression is not None
            and sympy.expand(self.expression - U**2 / 2) == 0
        )

    def f1_range(self, lo: float, hi: float) -> tuple[float, float]:
        """Return the minimum and maximum of f' on [lo, hi].

        f' is increasing for a convex flux, so these are its end values.
        """
        return float(self.eval_f1(lo)), float(self.eval_f1(hi))

    def sup_abs_f1(self, lo: float, hi: float) -> float:
        """Return the maximum of |f'| on [lo, hi]."""
        return max(map(abs, self.f1_range(lo, hi)))

    def mirrored(self) -> FluxModel:
        """Return the flux u -> f(-u), convex on the same working interval."""
        f, f1, f2 = self.eval_f, self.eval_f1, self.eval_f2
        return FluxModel(
            f"{self.name}_mirrored",
            lambda u: f(-np.asarray(u, dtype=float)),
            lambda u: -f1(-np.asarray(u, dtype=float)),
            lambda u: f2(-np.asarray(u, dtype=float)),
            self.convexity_bound,
            self.M,
            None if self.expression is None else self.expression.subs(U, -U),
        )

    def to_dict(self) -> dict[str, Any]:
        """Get a plain representation for metadata files."""
        return {
            "name": self.name,
            "expression": None if self.expression is None else str(self.expression),
            "M": self.M,
        }


@dataclass(frozen=True)
class ShockData:
    """End states and speeds of an admissible shock."""

    u_minus: float
    """State as x -> -infinity."""

    u_plus: float
    """State as x -> +infinity."""

    a: float
    """Relaxation speed."""

    lam: float
    """Rankine-Hugoniot shock speed."""

    @property
    def delta(self) -> float:
        """Shock strength u_minus - u_plus."""
        return self.u_minus - self.u_plus

    @property
    def midpoint(self) -> float:
        """The state placed at x = 0 by every profile."""
        return 0.5 * (self.u_minus + self.u_plus)

    @property
    def relaxation_diffusion(self) -> float:
        """The constant a^2 - lambda^2 of the relaxation wave equation."""
        return self.a**2 - self.lam**2

    @property
    def gamma(self) -> float:
        """Geometric factor lambda / (a^2 - lambda^2) of the remainder identity."""
        return self.lam / self.relaxation_diffusion

    def to_dict(self) -> dict[str, float]:
        """Get a plain representation for metadata files."""
        return {
            "u_minus": self.u_minus,
            "u_plus": self.u_plus,
            "a": self.a,
            "lambda": self.lam,
            "delta": self.delta,
        }


def shock_speed(flux: FluxModel, u_minus: float, u_plus: float) -> float:
    """Compute the Rankine-Hugoniot speed of a jump.

    The quotient is formed exactly when the flux has a symbolic form.
    """
    if flux.expression is not None:
        um, up = exact(u_minus), exact(u_plus)
        quotient = (flux.expression.subs(U, um) - flux.expression.subs(U, up)) / (
            um - up
        )
        return float(sympy.N(quotient, 30))
    return (flux.eval_f(u_minus) - flux.eval_f(u_plus)) / (u_minus - u_plus)


def make_shock(flux: FluxModel, u_minus: float, u_plus: float, a: float) -> ShockData:
    """Build the data of an admissible shock and check its invariants.

    Args:
        flux: The flux function
        u_minus: Left state
        u_plus: Right state
        a: Relaxation speed
    Raises:
        AdmissibilityError: u_minus <= u_plus
        WorkingIntervalError: A state lies outside [-M, M]
        SubcharacteristicError: sup |f'| >= a on the interval padded by delta
    """
    u_minus, u_plus, a = float(u_minus), float(u_plus), float(a)
    if not a > 0.0:
        raise ModelError(f"Relaxation speed must be positive, got {a}")
    if not u_minus > u_plus:
        raise AdmissibilityError(u_minus, u_plus)
    for state in (u_minus, u_plus):
        if abs(state) > flux.M:
            raise WorkingIntervalError(
                f"State {state} lies outside [-{flux.M}, {flux.M}] for flux {flux.name}"
            )

    delta = u_minus - u_plus
    sup_f1 = flux.sup_abs_f1(u_plus - delta, u_minus + delta)
    if sup_f1 >= a:
        raise SubcharacteristicError(
            f"Sub-characteristic condition fails: sup |f'| = {sup_f1:g} >= a = {a:g}"
        )

    shock = ShockData(u_minus, u_plus, a, shock_speed(flux, u_minus, u_plus))
    logging.debug(f"Shock {shock.to_dict()} for flux {flux.name}")
    return shock


def mirror_shock(shock: ShockData, flux: FluxModel) -> tuple[ShockData, FluxModel]:
    """Return the shock of the problem reflected by x -> -x, u -> -u.

    The reflected flux is u -> f(-u) and the shock runs from -u_+ to -u_-, so its
    speed is -lambda. A profile u of the original problem gives the profile
    -u(-x) of the reflected one.
    """
    mirrored = flux.mirrored()
    return make_shock(mirrored, -shock.u_plus, -shock.u_minus, shock.a), mirrored


def chord_P(shock: ShockData, flux: FluxModel, u: ArrayLike) -> Any:
    """Evaluate the chord function P(u).

    >>> burgers = get_flux("burgers")
    >>> round(chord_P(make_shock(burgers, 0.1, -0.1, 1.0), burgers, 0.0), 6)
    -0.005
    """
    u_arr = np.asarray(u, dtype=float)
    out = flux.eval_f(u_arr) - flux.eval_f(shock.u_minus) - shock.lam * (
        u_arr - shock.u_minus
    )
    return float(out) if np.ndim(out) == 0 else out


def chord_P_prime(shock: ShockData, flux: FluxModel, u: ArrayLike) -> Any:
    """Evaluate P'(u) = f'(u) - lambda."""
    out = flux.eval_f1(u) - shock.lam
    return float(out) if np.ndim(out) == 0 else out


def polynomial_flux(
    coeffs: Sequence[float | str],
    M: float = config.WORKING_BOUND,
    name: str = "polynomial",
) -> FluxModel:
    """Build a polynomial flux from coefficients, lowest degree first.

    Coefficients are taken as exact decimals, so ``0.1`` means 1/10.

    Raises:
        ModelError: No coefficients were given
        ConvexityError: The polynomial is not strictly convex on [-M, M]
    """
    if not coeffs:
        raise ModelError("A polynomial flux needs at least one coefficient")
    expression = sum(
        (exact(c) * U**k for k, c in enumerate(coeffs)), start=sympy.Integer(0)
    )
    return FluxModel.from_expression(name, expression, M)


@cache
def _registry() -> frozendict[str, FluxModel]:
    fluxes = (
        FluxModel.from_expression("burgers", U**2 / 2),
        FluxModel.from_expression("exponential", sympy.exp(U)),
        FluxModel.from_expression("quartic", U**2 / 2 + U**4 / 12),
    )
    return frozendict({flux.name: flux for flux in fluxes})


def builtin_fluxes() -> list[FluxModel]:
    """Return the builtin fluxes, each on the working interval [-2, 2]."""
    return list(_registry().values())


def get_flux(name: str) -> FluxModel:
    """Look up a builtin flux by name.

    Raises:
        ModelError: There is no builtin flux with this name
    """
    try:
        return _registry()[name]
    except KeyError:
        raise ModelError(
            f"Unknown flux {name!r}; choose from {', '.join(_registry())}"
        ) from None
