"""Set up the program's logger."""

import logging
import os
from datetime import datetime
from pathlib import Path

from platformdirs import user_log_path

from ceshock import config

log_file: Path


def get_log_path() -> Path:
    """Return the user log path."""
    log_path = user_log_path(config.APP_NAME, config.APP_AUTHOR)
    log_path.mkdir(parents=True, exist_ok=True)
    return log_path


def get_log_level() -> str:
    """Read the log level from the environment.

    Raises:
        ValueError: The variable holds an unknown level
    """
    name = (os.environ.get(config.LOG_LEVEL_ENV) or config.DEFAULT_LOG_LEVEL).lower()
    if name not in config.LOG_LEVELS:
        raise ValueError(f"Invalid log level: {name}")
    return config.LOG_LEVELS[name]


def initialise_logging() -> None:
    """Configure the program's logger."""
    global log_file
    log_file = get_log_path() / f"{datetime.now().strftime('%Y%m%d_%H-%M-%S')}.log"

    # Log to file and standard error; data files never see log output
    logging.basicConfig(
        level=get_log_level(),
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[logging.FileHandler(log_file), logging.StreamHandler()],
    )
