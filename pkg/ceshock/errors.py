"""The two families of errors raised by the package.

Command-line exit codes are chosen by family, so every specific error derives from one
of these.
"""


class ModelError(Exception):
    """The inputs describe an invalid model, shock or configuration."""


class SolverError(Exception):
    """A numerical procedure failed on otherwise valid inputs."""
