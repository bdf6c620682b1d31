"""Provides functions for writing and reading result files.

Data files are plain CSV with a single header line, LF line endings and floats with
17 significant digits. Profiles get a JSON sidecar with their metadata. Nothing
written here carries a timestamp, so identical runs give identical files.
"""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from ceshock import config
from ceshock.errors import ModelError
from ceshock.flux_model import ShockData
from ceshock.wave_solvers import OdeSettings, WaveProfile


class DataFileError(ModelError):
    """A result file could not be written or read."""

    def __init__(self, path: Path, reason: str) -> None:
        """Create a new DataFileError.

        Args:
            path: The offending file
            reason: What went wrong
        """
        super().__init__(f"{path}: {reason}")
        self.path = path


def _get_app_info() -> dict[str, str]:
    return {
        "name": config.APP_NAME,
        "author": config.APP_AUTHOR,
        "version": config.APP_VERSION,
    }


def sidecar_path(path: Path) -> Path:
    """Path of the JSON metadata file belonging to a CSV file."""
    return path.with_suffix(".json")


def _format(value: Any) -> str:
    if isinstance(value, float | np.floating):
        return config.FLOAT_FORMAT % value
    return str(value)


def write_table(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    """Write rows to a CSV file.

    Raises:
        DataFileError: The file cannot be written
    """
    logging.info(f"Writing {path}")
    try:
        with path.open("w", encoding="utf-8", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_format(v) for v in row] for row in rows)
    except OSError as e:
        raise DataFileError(path, e.strerror or str(e)) from e


def write_json(path: Path, data: dict[str, Any]) -> None:
    """Write an object to a JSON file, keeping the key order.

    Raises:
        DataFileError: The file cannot be written
    """
    logging.info(f"Writing {path}")
    try:
        with path.open("w", encoding="utf-8", newline="\n") as file:
            json.dump(data, file, indent=2, allow_nan=False)
            file.write("\n")
    except OSError as e:
        raise DataFileError(path, e.strerror or str(e)) from e


def dump_json(data: dict[str, Any]) -> str:
    """Serialise an object exactly as :func:`write_json` does."""
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def write_profile(path: Path, profile: WaveProfile) -> None:
    """Write a profile as CSV with header x,u and its JSON sidecar."""
    write_table(path, ("x", "u"), zip(profile.xs, profile.us))
    metadata = profile.to_metadata()
    metadata["system"] = {"app": _get_app_info()}
    write_json(sidecar_path(path), metadata)


def read_profile(path: Path) -> WaveProfile:
    """Read a profile written by :func:`write_profile`.

    Raises:
        DataFileError: A file is missing or malformed
        ProfileInvariantError: The data is not a valid profile
    """
    logging.info(f"Reading profile from {path}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        with sidecar_path(path).open(encoding="utf-8") as file:
            metadata = json.load(file)
    except OSError as e:
        raise DataFileError(path, e.strerror or str(e)) from e
    except ValueError as e:
        raise DataFileError(path, f"malformed data ({e})") from e

    if data.shape[1] != 2 or data.shape[0] < 3:
        raise DataFileError(path, "expected two columns and at least three rows")
    try:
        shock_data = metadata["shock"]
        shock = ShockData(
            shock_data["u_minus"],
            shock_data["u_plus"],
            shock_data["a"],
            shock_data["lambda"],
        )
        profile = WaveProfile(
            metadata["model_tag"],
            data[:, 0].copy(),
            data[:, 1].copy(),
            shock,
            metadata["normalization_residual"],
            metadata["flux"],
            OdeSettings(**metadata["settings"]),
        )
    except (KeyError, TypeError) as e:
        raise DataFileError(sidecar_path(path), f"missing or bad field {e}") from e
    profile.validate()
    return profile


def write_error_profile(
    path: Path, xs: np.ndarray, diffs: np.ndarray, summary: dict[str, Any]
) -> None:
    """Write an error profile as CSV with header x,diff and a summary sidecar."""
    write_table(path, ("x", "diff"), zip(xs, diffs))
    write_json(sidecar_path(path), {**summary, "system": {"app": _get_app_info()}})
