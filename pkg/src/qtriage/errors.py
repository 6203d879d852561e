"""Exception hierarchy shared across the package.

Exit codes used by the CLI hang off these classes so library code never
needs to know about process exit conventions.
"""


class QTriageError(Exception):
    exit_code = 1


class ConfigError(QTriageError):
    """Bad run configuration or CLI arguments."""

    exit_code = 2


class DataError(QTriageError):
    """Problems with input data files."""

    exit_code = 3


class ParseError(DataError):
    pass


class ValidationError(DataError):
    pass


class TrainingError(QTriageError):
    """Training cannot proceed (degenerate labels, bad folds, ...)."""

    exit_code = 4


class DegenerateTrainingError(TrainingError):
    pass


class StratificationError(TrainingError):
    pass
