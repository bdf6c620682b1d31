"""The main module for the CEShock program."""

from ceshock.config import APP_VERSION

__version__ = APP_VERSION


def run() -> None:
    """Run CEShock from the command line."""
    import sys

    # This must be done before our own modules are imported
    from ceshock.logger import initialise_logging

    initialise_logging()

    from ceshock.cli import main

    sys.exit(main())
