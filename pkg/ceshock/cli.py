"""The command-line front end.

Every command writes its results to files and returns an exit code: 0 on success, 2
for invalid input, 3 when a numerical procedure fails and 4 when a requested check
does not hold.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from decorator import decorator

from ceshock import config
from ceshock.analysis import (
    NormKind,
    error_profile,
    scaling_fit,
    solve_model,
    uniform_norm,
    weighted_norm,
)
from ceshock.data_files import (
    read_profile,
    sidecar_path,
    write_error_profile,
    write_json,
    write_profile,
    write_table,
)
from ceshock.errors import ModelError, SolverError
from ceshock.remainders import (
    REMAINDER_TABLE_HEADER,
    compute_remainders,
    remainder_table_rows,
)
from ceshock.run_config import (
    ConfigError,
    RunConfig,
    build_run_config,
    load_config_file,
)
from ceshock.verification import SUITES, run_suite
from ceshock.wave_solvers import WaveProfile, default_decay_rate


def _error_occurred(error: BaseException) -> None:
    """Log an error with its traceback and report it on standard error."""
    traceback_str = "".join(traceback.format_tb(error.__traceback__))
    logging.error(f"Caught error: {error!s}\n\n{traceback_str}")
    print(f"error: {error}", file=sys.stderr)


@decorator
def exit_codes(func: Callable, *args: Any, **kwargs: Any) -> int:
    """Map the two error families to exit codes."""
    try:
        return func(*args, **kwargs)
    except ModelError as error:
        _error_occurred(error)
        return config.EXIT_CONFIG_ERROR
    except SolverError as error:
        _error_occurred(error)
        return config.EXIT_SOLVER_ERROR


def _output_path(cfg: RunConfig, default: str) -> Path:
    return cfg.out if cfg.out is not None else Path(default)


def cmd_wave(cfg: RunConfig) -> int:
    """Compute one profile and write it with its metadata."""
    if len(cfg.models) != 1:
        raise ConfigError(f"wave computes one model, got {len(cfg.models)}")
    flux = cfg.flux_model()
    shock = cfg.shock(flux)
    profile = solve_model(cfg.models[0], shock, flux, cfg.ode_settings())
    out = _output_path(cfg, "wave.csv")
    write_profile(out, profile)
    print(f"Wrote {profile.model_tag} profile ({len(profile.xs)} points) to {out}")
    return config.EXIT_SUCCESS


def _compared_profiles(cfg: RunConfig, loads: Sequence[Path]) -> list[WaveProfile]:
    """Read the loaded profiles, then compute the remaining ones from the models."""
    profiles = [read_profile(path) for path in loads]
    if len(profiles) > 2:
        raise ConfigError("compare takes at most two profiles")

    flux = cfg.flux_model()
    needed = 2 - len(profiles)
    if len(cfg.models) < needed:
        raise ConfigError(f"compare needs {needed} more model(s) to go with --load")
    if needed == 0:
        return profiles

    if profiles and cfg.u_minus is None and cfg.center is None:
        shock = profiles[0].shock
    else:
        shock = cfg.shock(flux)
    for profile in profiles:
        if profile.flux_name != flux.name:
            logging.warning(
                f"Loaded profile was computed for flux {profile.flux_name}, "
                f"comparing with {flux.name}"
            )
    settings = cfg.ode_settings()
    for tag in cfg.models[:needed]:
        profiles.append(solve_model(tag, shock, flux, settings))
    return profiles


def cmd_compare(cfg: RunConfig, loads: Sequence[Path] = ()) -> int:
    """Write the error profile between two models and a summary of its norms."""
    first, second = _compared_profiles(cfg, loads)
    error = error_profile(first, second)
    c = cfg.c if cfg.c is not None else default_decay_rate(error.shock)
    x_min = cfg.x_min if cfg.x_min is not None else error.dx
    summary = {
        "model_pair": list(error.model_pair),
        "flux": first.flux_name,
        "shock": error.shock.to_dict(),
        "uniform_norm": uniform_norm(error),
        "weighted_norm": weighted_norm(error, c, x_min),
        "c": c,
        "x_min": x_min,
    }
    out = _output_path(cfg, "compare.csv")
    write_error_profile(out, error.xs, error.diffs, summary)
    uniform, weighted = summary["uniform_norm"], summary["weighted_norm"]
    print(f"{error.model_pair}: uniform {uniform:.6g}, weighted {weighted:.6g}")
    return config.EXIT_SUCCESS


def cmd_scaling(
    cfg: RunConfig, bracket: tuple[float, float] | None = None
) -> int:
    """Fit the exponent of an error norm over a sequence of shock strengths."""
    if cfg.center is None:
        raise ConfigError("scaling needs --center")
    if len(cfg.models) != 2:
        raise ConfigError("scaling needs exactly two models")
    report = scaling_fit(
        cfg.flux_model(),
        cfg.a,
        cfg.center,
        cfg.deltas,
        (cfg.models[0], cfg.models[1]),
        NormKind(cfg.norm),
        cfg.c,
        cfg.x_min,
        cfg.ode_settings(precise=True),
        cfg.jobs,
    )
    if cfg.format == "json":
        write_json(_output_path(cfg, "scaling.json"), report.to_dict())
    else:
        out = _output_path(cfg, "scaling.csv")
        write_table(out, ("delta", "norm", "status"), report.rows())
        write_json(sidecar_path(out), report.to_dict())

    print(
        f"{cfg.norm} exponent {report.fitted_exponent:.4f} "
        f"(residual {report.fit_residual:.3g})"
    )
    exponent = report.fitted_exponent
    if bracket is not None and not bracket[0] <= exponent <= bracket[1]:
        lo, hi = bracket
        print(f"Exponent {exponent:.4f} outside [{lo}, {hi}]", file=sys.stderr)
        return config.EXIT_ASSERTION_FAILED
    return config.EXIT_SUCCESS


def cmd_remainders(cfg: RunConfig) -> int:
    """Write the table of remainder sizes up to order n_max."""
    flux = cfg.flux_model()
    shock = cfg.shock(flux)
    reports = compute_remainders(shock, flux, cfg.n_max)
    write_table(
        _output_path(cfg, "remainders.csv"),
        REMAINDER_TABLE_HEADER,
        remainder_table_rows(reports),
    )
    return config.EXIT_SUCCESS


def cmd_verify(suite: str, json_path: Path | None = None) -> int:
    """Run a verification suite and print one line per check."""
    report = run_suite(suite)
    for result in report.results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} [{result.number:2d}] {result.name}")
    if json_path is not None:
        write_json(json_path, report.to_dict())
    return config.EXIT_SUCCESS if report.passed else config.EXIT_ASSERTION_FAILED


def _bracket(value: str) -> tuple[float, float]:
    """Parse lo:hi."""
    try:
        lo, hi = (float(v) for v in value.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {value!r}") from None
    if not lo <= hi:
        raise argparse.ArgumentTypeError(f"empty bracket {value!r}")
    return lo, hi


def _common_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, help="YAML or JSON run configuration")

    flux = parser.add_mutually_exclusive_group()
    flux.add_argument("--flux", help="builtin flux name")
    flux.add_argument(
        "--flux-coeffs",
        dest="flux_coeffs",
        help="polynomial flux coefficients, lowest degree first, comma separated",
    )

    state = parser.add_argument_group("shock")
    state.add_argument("--ul", "--u-minus", dest="u_minus", type=float)
    state.add_argument("--ur", "--u-plus", dest="u_plus", type=float)
    state.add_argument("--center", type=float)
    state.add_argument("--delta", type=float)
    state.add_argument("--a", type=float, help="relaxation speed")

    ode = parser.add_argument_group("integrator")
    ode.add_argument("--rtol", dest="rel_tol", type=float)
    ode.add_argument("--atol", dest="abs_tol", type=float)
    ode.add_argument("--x-max", dest="x_max", type=float)
    ode.add_argument("--dx", type=float)
    ode.add_argument("--tail-tol", dest="tail_tol", type=float)

    parser.add_argument("--out", type=Path, help="output file")
    return parser


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with its subcommands."""
    parser = argparse.ArgumentParser(
        prog="ceshock",
        description="Traveling waves of relaxation and Chapman-Enskog shock models",
    )
    parser.add_argument("--version", action="version", version=config.APP_VERSION)
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    wave = commands.add_parser("wave", parents=[common], help="compute a profile")
    wave.add_argument("--model", dest="models", help="model tag")

    compare = commands.add_parser(
        "compare", parents=[common], help="compare two profiles"
    )
    compare.add_argument("--models", help="two comma-separated model tags")
    compare.add_argument(
        "--load", type=Path, nargs="+", default=[], help="profile CSV files"
    )
    compare.add_argument("--c", type=float, help="decay rate of the weighted norm")
    compare.add_argument("--x-min", dest="x_min", type=float)

    scaling = commands.add_parser(
        "scaling", parents=[common], help="fit convergence exponents"
    )
    scaling.add_argument("--deltas", help="comma-separated shock strengths")
    scaling.add_argument("--models", help="two comma-separated model tags")
    scaling.add_argument("--norm", choices=[str(k) for k in NormKind])
    scaling.add_argument("--assert", dest="bracket", type=_bracket, metavar="LO:HI")
    scaling.add_argument("--jobs", type=int)
    scaling.add_argument("--format", choices=("csv", "json"))
    scaling.add_argument("--c", type=float)
    scaling.add_argument("--x-min", dest="x_min", type=float)

    remainders = commands.add_parser(
        "remainders", parents=[common], help="tabulate remainder sizes"
    )
    remainders.add_argument("--n-max", dest="n_max", type=int)

    verify = commands.add_parser("verify", help="run verification suites")
    verify.add_argument("--suite", choices=list(SUITES), default="all")
    verify.add_argument("--json", dest="json_path", type=Path)
    return parser


_CONFIG_KEYS = (
    "u_minus",
    "u_plus",
    "center",
    "delta",
    "a",
    "models",
    "rel_tol",
    "abs_tol",
    "x_max",
    "dx",
    "tail_tol",
    "deltas",
    "norm",
    "c",
    "x_min",
    "n_max",
    "jobs",
    "format",
    "out",
)


def _run_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    overrides["flux"] = args.flux or (
        args.flux_coeffs.split(",") if args.flux_coeffs else None
    )
    return build_run_config(file_values, overrides)


@exit_codes
def dispatch(args: argparse.Namespace) -> int:
    """Run the selected command."""
    if args.command == "verify":
        return cmd_verify(args.suite, args.json_path)

    cfg = _run_config(args)
    match args.command:
        case "wave":
            return cmd_wave(cfg)
        case "compare":
            return cmd_compare(cfg, args.load)
        case "scaling":
            return cmd_scaling(cfg, args.bracket)
        case _:
            return cmd_remainders(cfg)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse the command line and run a command.

    Returns:
        The exit code
    """
    args = build_parser().parse_args(argv)
    return dispatch(args)
