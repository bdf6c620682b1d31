"""Exact remainders of the relaxation wave under the order-n wave operators.

The relaxation wave u_* satisfies

    Q_n u_* = P(u_*) (1 - gamma^n R_n(u_*)),    gamma = lambda / (a^2 - lambda^2),

with Q_1 u = (a^2 - lambda f'(u)) u', Q_{n+1} u = Q_1 u + lambda (Q_n u)', and the
remainders R_1 = P', R_{n+1} = (P R_n)'. For a polynomial flux with rational
coefficients and decimal end states every R_n is a polynomial with rational
coefficients, computed here without rounding.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import sympy
from numpy.polynomial import Polynomial
from numpy.typing import ArrayLike
from scipy.optimize import minimize_scalar

from ceshock import config
from ceshock.errors import ModelError, SolverError
from ceshock.flux_model import U, FluxModel, ShockData, exact
from ceshock.wave_solvers import WaveProfile

X = sympy.Symbol("x", real=True)
"""Position variable of closed-form profiles."""

_T = sympy.Symbol("t", real=True)


class NonPolynomialFlux(ModelError):
    """Exact remainders were requested for a flux that is not a polynomial."""


class RootFindingError(SolverError):
    """The critical points of a remainder could not be found."""


class RemainderOverflowError(SolverError, OverflowError):
    """The requested remainder order exceeds what is computed exactly."""


@dataclass(frozen=True)
class ExactPolynomial:
    """A polynomial in u with rational coefficients, lowest degree first."""

    coeffs: tuple[sympy.Rational, ...]
    """Coefficients with trailing zeros removed."""

    def __post_init__(self) -> None:
        """Convert the coefficients to rationals and trim trailing zeros."""
        coeffs = [sympy.Rational(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def from_poly(cls, poly: sympy.Poly) -> ExactPolynomial:
        """Create from a sympy polynomial."""
        return cls(tuple(reversed(poly.all_coeffs())))

    @classmethod
    def from_expression(cls, expression: sympy.Expr) -> ExactPolynomial:
        """Create from a polynomial expression in :data:`U`."""
        return cls.from_poly(sympy.Poly(expression, U, domain=sympy.QQ))

    def to_poly(self) -> sympy.Poly:
        """Convert to a sympy polynomial over the rationals."""
        return sympy.Poly.from_list(
            list(reversed(self.coeffs)) or [0], U, domain=sympy.QQ
        )

    def as_expr(self) -> sympy.Expr:
        """Convert to a sympy expression in :data:`U`."""
        return self.to_poly().as_expr()

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial.

        >>> ExactPolynomial((1, 0, 3, 0)).degree
        2
        """
        return len(self.coeffs) - 1

    def derivative(self) -> ExactPolynomial:
        """Differentiate exactly."""
        return ExactPolynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def __mul__(self, other: ExactPolynomial) -> ExactPolynomial:
        """Multiply exactly."""
        return ExactPolynomial.from_poly(self.to_poly() * other.to_poly())

    def __call__(self, value: sympy.Rational | int) -> sympy.Rational:
        """Evaluate exactly at a rational point."""
        out = sympy.Integer(0)
        for c in reversed(self.coeffs):
            out = out * value + c
        return out

    def evaluate(self, u: ArrayLike) -> Any:
        """Evaluate in floating point."""
        return Polynomial([float(c) for c in self.coeffs] or [0.0])(u)


@dataclass(frozen=True)
class RemainderReport:
    """Size of one remainder on [u_+, u_-]."""

    n: int
    """Order."""

    sup_norm: float
    """max |R_n| over [u_+, u_-]."""

    normalized: float
    """sup_norm / (delta^n n!)."""

    gamma_factor: float
    """gamma^n with gamma = lambda / (a^2 - lambda^2)."""

    delta_scaled: float
    """sup_norm / delta^n."""

    sharp_normalized: float
    """sup_norm / ((delta / 2 pi)^n n!)."""

    @property
    def gamma_n_times_norm(self) -> float:
        """Size of the defect term gamma^n sup |R_n|."""
        return self.gamma_factor * self.sup_norm


def _check_order(n_max: int, cap: int) -> None:
    if n_max < 1:
        raise ModelError(f"Remainder order must be at least 1, got {n_max}")
    if n_max > cap:
        raise RemainderOverflowError(
            f"Remainder order {n_max} exceeds the cap of {cap} for this flux"
        )


def _exact_states(
    shock: ShockData, flux: FluxModel
) -> tuple[sympy.Rational, sympy.Rational, sympy.Expr]:
    if flux.expression is None:
        raise NonPolynomialFlux(f"Flux {flux.name} has no symbolic form")
    um, up = exact(shock.u_minus), exact(shock.u_plus)
    f = flux.expression
    return um, up, (f.subs(U, um) - f.subs(U, up)) / (um - up)


def chord_expression(shock: ShockData, flux: FluxModel) -> sympy.Expr:
    """Return P(u) as an exact expression in :data:`U`.

    Raises:
        NonPolynomialFlux: The flux has no symbolic form
    """
    um, _, lam = _exact_states(shock, flux)
    assert flux.expression is not None
    return flux.expression - flux.expression.subs(U, um) - lam * (U - um)


def chord_polynomial(shock: ShockData, flux: FluxModel) -> ExactPolynomial:
    """Return P exactly.

    Raises:
        NonPolynomialFlux: The flux is not a polynomial
    """
    if not flux.is_polynomial:
        raise NonPolynomialFlux(f"Flux {flux.name} is not a polynomial")
    return ExactPolynomial.from_expression(sympy.expand(chord_expression(shock, flux)))


def remainder_sequence(
    shock: ShockData, flux: FluxModel, n_max: int
) -> list[ExactPolynomial]:
    """Compute R_1, ..., R_{n_max} exactly.

    Raises:
        NonPolynomialFlux: The flux is not a polynomial
        RemainderOverflowError: n_max exceeds the exact-arithmetic cap
    """
    _check_order(n_max, config.REMAINDER_MAX_ORDER)
    p = chord_polynomial(shock, flux)
    sequence = [p.derivative()]
    while len(sequence) < n_max:
        sequence.append((p * sequence[-1]).derivative())
    logging.info(f"Computed {n_max} exact remainders for flux {flux.name}")
    return sequence


def remainder_expressions(
    shock: ShockData, flux: FluxModel, n_max: int
) -> list[sympy.Expr]:
    """Compute R_1, ..., R_{n_max} symbolically for a non-polynomial flux.

    Raises:
        NonPolynomialFlux: The flux has no symbolic form
        RemainderOverflowError: n_max > 6
    """
    _check_order(n_max, config.NONPOLYNOMIAL_MAX_ORDER)
    p = chord_expression(shock, flux)
    sequence = [sympy.diff(p, U)]
    while len(sequence) < n_max:
        sequence.append(sympy.diff(p * sequence[-1], U))
    return sequence


def _sup_exact(poly: ExactPolynomial, shock: ShockData) -> float:
    """Maximum of |poly| on [u_+, u_-] over its critical points and ends.

    The polynomial is mapped to t in [-1, 1] first, which keeps the float
    coefficients used for root finding well scaled.
    """
    um, up = exact(shock.u_minus), exact(shock.u_plus)
    centre, half = (um + up) / 2, (um - up) / 2
    scaled = sympy.Poly(poly.as_expr().subs(U, centre + half * _T), _T, domain=sympy.QQ)
    floats = Polynomial([float(c) for c in reversed(scaled.all_coeffs())])
    try:
        roots = floats.deriv().roots()
    except np.linalg.LinAlgError as e:
        raise RootFindingError(f"Critical points of R_{poly.degree} not found") from e
    real = roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))].real
    candidates = [-1.0, 1.0, *np.clip(real[np.abs(real) <= 1.0 + 1e-12], -1.0, 1.0)]
    return max(abs(float(scaled.eval(sympy.Rational(t)))) for t in candidates)


def _sup_expression(expression: sympy.Expr, shock: ShockData) -> float:
    """Maximum of |expression| on [u_+, u_-], refined around the best grid point."""
    evaluate = sympy.lambdify(U, expression, modules="numpy")
    grid = np.linspace(shock.u_plus, shock.u_minus, config.NONPOLYNOMIAL_GRID_POINTS)
    values = np.abs(np.broadcast_to(evaluate(grid), grid.shape))
    best = int(np.argmax(values))
    result = minimize_scalar(
        lambda u: -abs(float(evaluate(u))),
        bounds=(grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]),
        method="bounded",
        options={"xatol": 1e-12 * shock.delta},
    )
    if not result.success:
        raise RootFindingError(f"Maximum search failed: {result.message}")

    def precise(u: float) -> float:
        value = expression.subs(U, sympy.Rational(u))
        return abs(float(sympy.N(value, config.NONPOLYNOMIAL_DIGITS)))

    return max(map(precise, (shock.u_plus, shock.u_minus, float(result.x))))


def remainder_norms(
    shock: ShockData, polys: Sequence[ExactPolynomial | sympy.Expr]
) -> list[RemainderReport]:
    """Measure sup |R_n| on [u_+, u_-] and its normalisations.

    Raises:
        RootFindingError: The critical-point search failed
    """
    delta, gamma = shock.delta, shock.gamma
    reports = []
    for n, poly in enumerate(polys, start=1):
        if isinstance(poly, ExactPolynomial):
            sup = _sup_exact(poly, shock)
        else:
            sup = _sup_expression(poly, shock)
        reports.append(
            RemainderReport(
                n=n,
                sup_norm=sup,
                normalized=sup / (delta**n * math.factorial(n)),
                gamma_factor=gamma**n,
                delta_scaled=sup / delta**n,
                sharp_normalized=sup
                / ((delta / (2.0 * math.pi)) ** n * math.factorial(n)),
            )
        )
    return reports


REMAINDER_TABLE_HEADER = (
    "n",
    "sup_norm",
    "normalized",
    "gamma_factor",
    "gamma_n_times_norm",
)
"""Columns of the remainder table."""


def remainder_table_rows(
    reports: Sequence[RemainderReport],
) -> list[tuple[int, float, float, float, float]]:
    """Rows (n, sup_norm, normalized, gamma_factor, gamma_n_times_norm)."""
    return [
        (r.n, r.sup_norm, r.normalized, r.gamma_factor, r.gamma_n_times_norm)
        for r in reports
    ]


def compute_remainders(
    shock: ShockData, flux: FluxModel, n_max: int
) -> list[RemainderReport]:
    """Compute the remainder table, exactly when the flux is a polynomial."""
    polys: Sequence[ExactPolynomial | sympy.Expr]
    if flux.is_polynomial:
        polys = remainder_sequence(shock, flux, n_max)
    else:
        polys = remainder_expressions(shock, flux, n_max)
    return remainder_norms(shock, polys)


def _remainder_function(shock: ShockData, flux: FluxModel, n: int) -> Any:
    if flux.is_polynomial:
        return remainder_sequence(shock, flux, n)[-1].evaluate
    expression = remainder_expressions(shock, flux, n)[-1]
    return sympy.lambdify(U, expression, modules="numpy")


def _burgers_operator_ratio(
    shock: ShockData, n: int, xs: np.ndarray, remainder: Any
) -> np.ndarray:
    """Relative defect of the identity along the closed-form Burgers wave.

    Q_n is built by differentiating the closed form in x; P along the wave is
    written without subtracting nearby states.
    """
    um, up = exact(shock.u_minus), exact(shock.u_plus)
    a, lam = exact(shock.a), (um + up) / 2
    delta, gap = um - up, exact(shock.a) ** 2 - lam**2
    decay = sympy.exp(-delta * X / (2 * gap))
    u = um - delta / (1 + decay)
    p = -(delta**2) * decay / (2 * (1 + decay) ** 2)

    q1 = (a**2 - lam * u) * sympy.diff(u, X)
    q = q1
    for _ in range(n - 1):
        q = q1 + lam * sympy.diff(q, X)

    gamma = float(lam / gap)
    lhs = sympy.lambdify(X, q, modules="numpy")(xs)
    us = sympy.lambdify(X, u, modules="numpy")(xs)
    rhs = sympy.lambdify(X, p, modules="numpy")(xs) * (1.0 - gamma**n * remainder(us))
    return np.abs(lhs - rhs) / np.abs(rhs)


def _general_operator_ratio(
    shock: ShockData, flux: FluxModel, n: int, us: np.ndarray, remainder: Any
) -> np.ndarray:
    """Relative defect of the identity using derivatives along the wave.

    Along u_* every x-derivative is d/dx = P / (a^2 - lambda^2) d/du, and
    Q_k u_* = P H_k / (a^2 - lambda^2) with H_1 = a^2 - lambda f' and
    H_{k+1} = H_1 + lambda (P' H_k + P H_k') / (a^2 - lambda^2).
    """
    _, _, lam = _exact_states(shock, flux)
    assert flux.expression is not None
    a2 = exact(shock.a) ** 2
    gap = a2 - lam**2
    p = chord_expression(shock, flux)
    h1 = a2 - lam * sympy.diff(flux.expression, U)
    h = h1
    for _ in range(n - 1):
        h = h1 + lam * (sympy.diff(p, U) * h + p * sympy.diff(h, U)) / gap

    gamma = float(lam / gap)
    lhs = np.broadcast_to(sympy.lambdify(U, h / gap, modules="numpy")(us), us.shape)
    rhs = 1.0 - gamma**n * remainder(us)
    return np.abs(lhs - rhs) / np.abs(rhs)


def verify_qn_identity(
    shock: ShockData, flux: FluxModel, n: int, profile: WaveProfile
) -> float:
    """Check Q_n u_* = P(u_*) (1 - gamma^n R_n(u_*)) along a relaxation wave.

    For Burgers' flux both sides are evaluated from the closed-form wave at the
    profile's positions; otherwise the derivatives are carried along the computed
    profile through its equation.

    Returns:
        The largest relative residual over the middle 80% of the grid
    Raises:
        ModelError: n lies outside 1..6
    """
    if not 1 <= n <= config.NONPOLYNOMIAL_MAX_ORDER:
        raise ModelError(f"The identity is checked for 1 <= n <= 6, got {n}")
    size = profile.xs.size
    middle = slice(size // 10, size - size // 10)
    remainder = _remainder_function(shock, flux, n)
    if flux.is_burgers:
        ratio = _burgers_operator_ratio(shock, n, profile.xs[middle], remainder)
    else:
        ratio = _general_operator_ratio(shock, flux, n, profile.us[middle], remainder)
    residual = float(np.max(ratio))
    logging.info(f"Q_{n} identity residual {residual:.3g}")
    return residual
