"""Common constants used throughout the package."""

from importlib.metadata import version

APP_NAME = "CEShock"
"""A human-readable name for the package."""

APP_AUTHOR = "Imperial College London"
"""The name of the package's author (used for the log path)."""

APP_VERSION = version("ceshock")
"""The current version of the package."""

LOG_LEVEL_ENV = "CESHOCK_LOG"
"""Environment variable holding the log level."""

LOG_LEVELS = {
    "error": "ERROR",
    "warn": "WARNING",
    "info": "INFO",
    "debug": "DEBUG",
}
"""Accepted values of the log level variable, mapped to :mod:`logging` names."""

DEFAULT_LOG_LEVEL = "warn"
"""Log level used when the environment variable is unset."""

WORKING_BOUND = 2.0
"""Half-width M of the working interval [-M, M] for builtin fluxes."""

CONVEXITY_SAMPLES = 1001
"""Number of points at which f'' is sampled to certify convexity."""

DERIVATIVE_CHECK_SAMPLES = 101
"""Number of points at which f' is checked against finite differences of f."""

DERIVATIVE_CHECK_RTOL = 1e-6
"""Relative tolerance of the finite-difference derivative check."""

REL_TOL = 1e-10
"""Default relative tolerance of the Runge-Kutta integrator."""

ABS_TOL = 1e-12
"""Default absolute tolerance of the Runge-Kutta integrator."""

PRECISE_REL_TOL = 1e-12
"""Relative tolerance used for scaling studies."""

PRECISE_ABS_TOL = 1e-14
"""Absolute tolerance used for scaling studies."""

GRID_DX_MAX = 0.05
"""Largest grid spacing of a profile."""

GRID_DX_SCALE = 0.005
"""Spacing is capped at this value divided by the shock strength."""

X_MAX_MIN = 50.0
"""Smallest half-width of the profile grid."""

X_MAX_SCALE = 40.0
"""Half-width of the grid in units of a^2 / delta."""

TAIL_TOL_REL = 1e-13
"""Tail tolerance per unit shock strength."""

TAIL_TOL_ABS = 1e-15
"""Absolute floor of the tail tolerance."""

MAX_STEP_FACTOR = 0.25
"""Integrator steps are capped at this multiple of the slowest tail decay length."""

NORMALIZATION_TOL = 1e-9
"""Allowed |u(0) - midpoint| per unit shock strength."""

SADDLE_OFFSET = 1e-6
"""Distance of the shooting start point from the saddle, per unit shock strength."""

SHOOTING_STEPS = 4001
"""Number of nodes at which the second-order phase trajectory is sampled."""

COMPARISON_C = 1.0
"""Default constant C in mu = lambda^2 (1 +/- C delta^2)."""

COMPARISON_C_RANGE = (0.1, 100.0)
"""Search range of the comparison constant C."""

COMPARISON_C_PRECISION = 1e-3
"""Relative precision of the bisection for C."""

SIGN_GRID_POINTS = 1001
"""Grid points on [u+, u-] at which the comparison sign conditions are checked."""

LEMMA_MARGIN = 1.05
"""Margin applied to fitted comparison constants when re-checking on a finer grid."""

REMAINDER_MAX_ORDER = 20
"""Largest remainder order computed with exact arithmetic."""

NONPOLYNOMIAL_MAX_ORDER = 6
"""Largest remainder order for non-polynomial fluxes."""

NONPOLYNOMIAL_DIGITS = 34
"""Significant digits used to evaluate remainders of non-polynomial fluxes."""

NONPOLYNOMIAL_GRID_POINTS = 4001
"""Grid points used to locate the maximum of a non-polynomial remainder."""

MIN_SCALING_POINTS = 4
"""Smallest number of successful shock strengths in a scaling fit."""

FIT_RESIDUAL_GATE = 0.1
"""Largest acceptable root-mean-square residual of a log-log fit."""

FLOAT_FORMAT = "%.17g"
"""Format of floats in data files; round-trips doubles exactly."""

EXIT_SUCCESS = 0
"""Exit code of a successful command."""

EXIT_CONFIG_ERROR = 2
"""Exit code for usage and configuration errors."""

EXIT_SOLVER_ERROR = 3
"""Exit code for numerical failures."""

EXIT_ASSERTION_FAILED = 4
"""Exit code when a requested acceptance check fails."""

TAIL_MARGIN = 1.25
"""Safety factor on the distance at which the slowest tail reaches its tolerance."""

RESOLVED_FACTOR = 1e3
"""Points further than this many tail tolerances from both end states are resolved."""

ORDERING_TOL_FACTOR = 10.0
"""Ordering checks allow this many integrator tolerances of overlap."""
