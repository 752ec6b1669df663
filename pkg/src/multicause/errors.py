"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError (and its
subclasses) exit 1, PredictiveCheckFailed exits 2, NumericError exits 3.
"""


class MulticauseError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MulticauseError):
    """Bad input: malformed files, inconsistent shapes, violated preconditions."""


class ParseError(ValidationError):
    """CSV text could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(MulticauseError):
    """Numerical failure: singular systems, non-convergence, degenerate spectra."""


class RankDeficiencyError(NumericError):
    """Design matrix is rank deficient; lists the columns implicated."""

    def __init__(self, message: str, columns: list[str] | None = None):
        super().__init__(message)
        self.columns = list(columns or [])


class PredictiveCheckFailed(MulticauseError):
    """Pipeline gate: the fitted factor model failed the held-out check."""

    def __init__(self, score: float, threshold: float):
        super().__init__(
            f"predictive check score {score:.4f} <= threshold {threshold:g}"
        )
        self.score = score
        self.threshold = threshold
