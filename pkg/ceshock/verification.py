"""Self-checks of the solvers against closed forms, implicit formulas and scaling laws.

Each check is numbered and belongs to one or more suites. A check that raises is
recorded as failed with its error message, so a suite always runs to completion.
"""

from __future__ import annotations

import logging
import math
import traceback
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from tempfile import TemporaryDirectory
from typing import Any

import numpy as np
import sympy
from frozendict import frozendict

from ceshock.analysis import error_profile, fit_exponent, scaling_fit, uniform_norm
from ceshock.data_files import write_profile, write_table
from ceshock.flux_model import ShockData, exact, get_flux, make_shock
from ceshock.remainders import (
    REMAINDER_TABLE_HEADER,
    ExactPolynomial,
    compute_remainders,
    remainder_sequence,
    remainder_table_rows,
    verify_qn_identity,
)
from ceshock.second_order import check_sandwich_v2, solve_v2, v2_residual
from ceshock.wave_solvers import (
    OdeSettings,
    ProfileKind,
    burgers_closed_form,
    check_sandwich,
    invert_implicit,
    lemma_constants,
    solve_first_order,
    solve_relaxation,
)

CheckResult = tuple[bool, dict[str, Any]]

SCALING_CENTER = 0.2
"""Midpoint of the shocks of every scaling check."""

SCALING_DELTAS = (0.4, 0.2, 0.1, 0.05, 0.025)
"""Shock strengths of every scaling check."""

FIRST_ORDER_BRACKETS = frozendict({"uniform": (1.8, 2.2), "weighted": (2.6, 3.4)})
"""Accepted exponents of first-order errors."""

SECOND_ORDER_BRACKETS = frozendict({"uniform": (2.7, 3.3), "weighted": (3.5, 4.5)})
"""Accepted exponents of the second-order error."""

MAX_FIT_RESIDUAL = 0.1
"""Largest accepted root-mean-square residual of a scaling fit."""

LEMMA_MU_PAIRS = ((-0.4, -0.2), (-0.2, 0.0), (0.0, 0.2), (0.2, 0.4), (-0.3, 0.3))
"""Comparison parameters, as multiples of a^2, of the comparison-profile check."""


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one check."""

    number: int
    name: str
    passed: bool
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        """Get a plain representation for the JSON report."""
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "details": self.details,
        }


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a suite."""

    suite: str
    results: tuple[CriterionResult, ...]

    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict[str, Any]:
        """Get a plain representation for the JSON report."""
        return {
            "suite": self.suite,
            "passed": self.passed,
            "criteria": [r.to_dict() for r in self.results],
        }


_criteria: dict[int, tuple[str, Callable[[], CheckResult]]] = {}


def _criterion(
    number: int, name: str
) -> Callable[[Callable[[], CheckResult]], Callable[[], CheckResult]]:
    def register(func: Callable[[], CheckResult]) -> Callable[[], CheckResult]:
        _criteria[number] = (name, func)
        return func

    return register


def _within(value: float, bracket: tuple[float, float]) -> bool:
    return bracket[0] <= value <= bracket[1]


@_criterion(1, "Burgers relaxation wave matches its closed form")
def _closed_form() -> CheckResult:
    burgers = get_flux("burgers")
    shock = make_shock(burgers, 0.1, -0.1, 1.0)
    profile = solve_relaxation(shock, burgers, OdeSettings(x_max=400.0))
    exact_wave = burgers_closed_form(shock, burgers, profile.xs)
    error = float(np.max(np.abs(profile.us - exact_wave)))
    return error <= 1e-8, {"sup_error": error}


@_criterion(2, "First-order waves match their implicit formulas")
def _implicit_formula() -> CheckResult:
    xs = np.linspace(-40.0, 40.0, 21)
    details = {}
    for name in ("burgers", "quartic"):
        flux = get_flux(name)
        shock = make_shock(flux, 0.3, 0.1, 1.0)
        for kind in ProfileKind:
            profile = solve_first_order(shock, flux, kind)
            implicit = [invert_implicit(shock, flux, kind, x) for x in xs]
            details[f"{name}/{kind}"] = float(np.max(np.abs(profile.at(xs) - implicit)))
    return max(details.values()) <= 1e-7, details


@_criterion(3, "Comparison profiles obey the distance bound on a refined grid")
def _comparison_bound() -> CheckResult:
    details = {}
    passed = True
    for name in ("burgers", "quartic"):
        flux = get_flux(name)
        for delta in (0.2, 0.1):
            shock = make_shock(
                flux, SCALING_CENTER + delta / 2, SCALING_CENTER - delta / 2, 1.0
            )
            pairs = [(m1 * shock.a**2, m2 * shock.a**2) for m1, m2 in LEMMA_MU_PAIRS]
            constants = lemma_constants(shock, flux, pairs)
            details[f"{name}/delta={delta:g}"] = {
                "C": constants.C,
                "c": constants.c,
                "refined_C": constants.refined_C,
            }
            passed &= constants.holds
    return passed, details


@_criterion(4, "Comparison profiles sandwich every wave")
def _sandwiches() -> CheckResult:
    burgers = get_flux("burgers")
    shock = make_shock(burgers, 0.3, 0.1, 1.0)
    details: dict[str, Any] = {}
    passed = True
    for kind in (ProfileKind.W1, ProfileKind.V1, ProfileKind.RELAXATION):
        report = check_sandwich(solve_first_order(shock, burgers, kind), burgers)
        details[str(kind)] = report.max_violation
        passed &= report.ordering_ok
    v2_report = check_sandwich_v2(shock, burgers, solve_v2(shock, burgers))
    details["v2"] = v2_report.to_dict()
    passed &= (
        v2_report.ordering_ok
        and v2_report.max_K_plus_violation == 0.0
        and v2_report.max_K_minus_violation == 0.0
    )
    return passed, details


def _scaling_check(
    flux_name: str,
    a: float,
    models: tuple[str, ...],
    brackets: frozendict[str, tuple[float, float]],
) -> CheckResult:
    flux = get_flux(flux_name)
    details = {}
    passed = True
    for model in models:
        for norm, bracket in brackets.items():
            report = scaling_fit(
                flux,
                a,
                SCALING_CENTER,
                SCALING_DELTAS,
                (model, "relaxation"),
                norm,
            )
            details[f"{flux_name}/{model}/{norm}"] = {
                "exponent": report.fitted_exponent,
                "residual": report.fit_residual,
            }
            passed &= (
                not report.failures
                and _within(report.fitted_exponent, bracket)
                and report.fit_residual < MAX_FIT_RESIDUAL
            )
    return passed, details


@_criterion(5, "First-order errors scale as delta^2 and delta^3 for Burgers' flux")
def _burgers_scaling() -> CheckResult:
    return _scaling_check("burgers", 1.0, ("v1", "w1"), FIRST_ORDER_BRACKETS)


@_criterion(6, "First-order errors scale as delta^2 and delta^3 for general fluxes")
def _general_scaling() -> CheckResult:
    passed, details = _scaling_check(
        "quartic", 1.5, ("v1", "w1"), FIRST_ORDER_BRACKETS
    )
    more_passed, more = _scaling_check(
        "exponential", 2.5, ("v1", "w1"), FIRST_ORDER_BRACKETS
    )
    return passed and more_passed, details | more


@_criterion(7, "Second-order error scales as delta^3 and delta^4")
def _second_order_scaling() -> CheckResult:
    return _scaling_check("burgers", 1.0, ("v2",), SECOND_ORDER_BRACKETS)


@_criterion(8, "Chapman-Enskog waves equal the relaxation wave when lambda = 0")
def _zero_speed_collapse() -> CheckResult:
    burgers = get_flux("burgers")
    details = {}
    for delta in (0.4, 0.2, 0.1):
        shock = make_shock(burgers, delta / 2, -delta / 2, 1.0)
        relaxation = solve_relaxation(shock, burgers)
        for model, profile in (
            ("v1", solve_first_order(shock, burgers, ProfileKind.V1)),
            ("v2", solve_v2(shock, burgers)),
        ):
            distance = uniform_norm(error_profile(profile, relaxation))
            details[f"{model}/delta={delta:g}"] = distance
    return max(details.values()) <= 1e-9, details


@_criterion(9, "The relaxation wave satisfies the order-n remainder identity")
def _remainder_identity() -> CheckResult:
    burgers = get_flux("burgers")
    shock = make_shock(burgers, 0.3, 0.1, 1.0)
    profile = solve_relaxation(shock, burgers)
    details = {
        f"n={n}": verify_qn_identity(shock, burgers, n, profile) for n in (1, 2, 3)
    }
    return max(details.values()) < 1e-6, details


def _hand_derived_remainders(shock: ShockData) -> tuple[ExactPolynomial, ...]:
    """R_1 = u - lambda and R_2 = (u - lambda)^2 + P(u) for Burgers' flux."""
    um, up = exact(shock.u_minus), exact(shock.u_plus)
    lam = (um + up) / 2
    r1 = ExactPolynomial((-lam, 1))
    p = ExactPolynomial((um * up / 2, -lam, sympy.Rational(1, 2)))
    return r1, ExactPolynomial.from_poly(r1.to_poly() ** 2 + p.to_poly())


@_criterion(10, "Remainders grow at the factorial rate")
def _remainder_growth() -> CheckResult:
    burgers = get_flux("burgers")
    shock = make_shock(burgers, 0.1, -0.1, 1.0)
    reports = compute_remainders(shock, burgers, 13)
    sups = [r.sup_norm for r in reports]
    one_step = [
        sups[n] / (shock.delta * (n + 1) * sups[n - 1]) for n in range(2, 13)
    ]
    first_two = remainder_sequence(shock, burgers, 2)
    exact_match = tuple(first_two) == _hand_derived_remainders(shock)

    details = {
        "max_normalized": max(r.normalized for r in reports[:12]),
        "sharp_normalized_range": [
            min(r.sharp_normalized for r in reports[:12]),
            max(r.sharp_normalized for r in reports[:12]),
        ],
        "one_step_range": [min(one_step), max(one_step)],
        "exact_R1_R2": exact_match,
    }
    passed = (
        details["max_normalized"] <= 1e4
        and all(_within(r.sharp_normalized, (1e-4, 1e4)) for r in reports[:12])
        and all(_within(ratio, (0.1, 10.0)) for ratio in one_step)
        and exact_match
    )
    return passed, details


@_criterion(11, "The second-order residual converges under grid refinement")
def _residual_convergence() -> CheckResult:
    burgers = get_flux("burgers")
    shock = make_shock(burgers, 0.3, 0.1, 1.0)
    spacings = (0.4, 0.2, 0.1)
    x_max = OdeSettings().resolve_x_max(shock, burgers)
    residuals = [
        v2_residual(
            shock,
            burgers,
            solve_v2(shock, burgers, ode=OdeSettings.precise(x_max=x_max, grid_dx=dx)),
        )
        for dx in spacings
    ]
    order, _ = fit_exponent(spacings, residuals)
    return order >= 1.8, {"residuals": residuals, "order": order}


def _serialised_outputs() -> tuple[bytes, bytes]:
    burgers = get_flux("burgers")
    shock = make_shock(burgers, 0.1, -0.1, 1.0)
    with TemporaryDirectory() as tmp:
        profile_path, table_path = Path(tmp) / "wave.csv", Path(tmp) / "table.csv"
        write_profile(profile_path, solve_relaxation(shock, burgers))
        write_table(
            table_path,
            REMAINDER_TABLE_HEADER,
            remainder_table_rows(compute_remainders(shock, burgers, 6)),
        )
        return profile_path.read_bytes(), table_path.read_bytes()


@_criterion(12, "Identical inputs give byte-identical output files")
def _determinism() -> CheckResult:
    identical = _serialised_outputs() == _serialised_outputs()
    return identical, {"identical": identical}


SUITES = frozendict(
    {
        "burgers": (1, 2, 3, 4, 5, 8),
        "general": (2, 3, 6),
        "second_order": (4, 7, 11),
        "remainders": (9, 10),
        "determinism": (12,),
        "all": tuple(range(1, 13)),
    }
)
"""Checks run by each suite."""


def run_criterion(number: int) -> CriterionResult:
    """Run one check, recording an exception as a failure."""
    name, check = _criteria[number]
    logging.info(f"Running check {number}: {name}")
    try:
        passed, details = check()
    except Exception as error:
        traceback_str = "".join(traceback.format_tb(error.__traceback__))
        logging.error(f"Check {number} raised: {error!s}\n\n{traceback_str}")
        return CriterionResult(number, name, False, {"error": str(error)})

    details = _plain(details)
    if not passed:
        logging.warning(f"Check {number} failed: {details}")
    return CriterionResult(number, name, bool(passed), details)


def _plain(value: Any) -> Any:
    """Convert numpy scalars so details serialise as JSON."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(v) for v in value]
    if isinstance(value, np.bool_ | bool):
        return bool(value)
    if isinstance(value, np.floating | float):
        return float(value) if math.isfinite(value) else str(value)
    return value


def run_suite(suite: str) -> VerificationReport:
    """Run every check of a suite.

    Raises:
        KeyError: There is no such suite
    """
    return VerificationReport(suite, tuple(map(run_criterion, SUITES[suite])))
