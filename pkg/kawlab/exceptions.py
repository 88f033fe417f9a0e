"""
Error hierarchy shared by the numerical core, the experiment runner and the CLI.

Every error carries the name of the stage that raised it so that reports and
log lines can say where a run failed. The CLI maps the two top-level families
to exit codes: configuration problems exit with 2, numerical problems with 3.
Failed verdicts are not exceptions; they travel inside reports.
"""

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


class KawlabError(Exception):
    """Base class for all errors raised by kawlab."""

    exit_code = EXIT_NUMERICAL_ERROR

    def __init__(self, message: str, *, stage: str | None = None):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        message = super().__str__()
        if self.stage:
            return f"[{self.stage}] {message}"
        return message


class ConfigError(KawlabError):
    """Invalid run configuration or invalid arguments to an operation."""

    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, message: str, *, key: str | None = None, stage: str | None = None):
        super().__init__(message, stage=stage)
        self.key = key

    def __str__(self) -> str:
        message = super().__str__()
        if self.key:
            return f"{self.key}: {message}"
        return message


class GridError(ConfigError):
    """Mesh preconditions violated (too few nodes, mismatched grids)."""


class ParameterError(ConfigError):
    """A numerical parameter lies outside its admissible range."""


class NumericalError(KawlabError):
    """A computation failed: singular solve, degenerate fit, eigensolver failure."""


class BlowUpError(NumericalError):
    """The solution norm left the small-data regime."""


class NonContractionError(NumericalError):
    """Picard iteration stopped contracting."""


class CoverageError(NumericalError):
    """A trajectory does not cover the time window an operation needs."""


class TrajectoryFileError(KawlabError):
    """A trajectory file is truncated, corrupted or of an unknown version."""
