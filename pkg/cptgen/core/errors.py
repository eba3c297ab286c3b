"""Exception hierarchy shared by all cptgen modules.

Every error knows the process exit code the command line front end should
return for it: 1 for bad input, 2 for numerical failure.
"""

from typing import Any


class CptError(Exception):
    """Base class for all cptgen errors."""

    exit_code: int = 1

    def __init__(
        self,
        message: str,
        *,
        row: int | None = None,
        column: str | int | None = None,
        node: str | None = None,
        path: str | None = None,
    ) -> None:
        self.reason = message
        self.row = row
        self.column = column
        self.node = node
        self.path = path
        super().__init__(self._render())

    def with_path(self, path: object) -> "CptError":
        """Attach the offending file to the error and return it for re-raising."""
        self.path = str(path)
        self.args = (self._render(),)
        return self

    def _render(self) -> str:
        where = []
        if self.path is not None:
            where.append(f"file {self.path}")
        if self.row is not None:
            where.append(f"row {self.row}")
        if self.node is not None:
            where.append(f"node {self.node}")
        if self.column is not None:
            where.append(f"column {self.column}")
        if not where:
            return self.reason
        return f"{', '.join(where)}: {self.reason}"


class InputError(CptError):
    """Raised for malformed or inconsistent input (exit code 1)."""

    exit_code = 1


class ValidationError(InputError):
    """Raised when a value violates a probability constraint."""


class DimensionError(InputError):
    """Raised when vector or matrix shapes disagree."""


class SchemaError(InputError):
    """Raised when a CSV header does not match the expected schema."""


class ParseError(InputError):
    """Raised for malformed CSV or CPT files."""


class SoftEvidenceError(InputError):
    """Raised when counting-based estimation meets soft evidence."""


class PredictorRangeError(InputError):
    """Raised when a predictor returns something that is not a probability vector."""


class DegenerateMarginalError(InputError):
    """Raised when a CPT reversal meets an effect state with zero marginal."""


class IoError(InputError):
    """Raised when a file cannot be read or written."""


class NumericalError(CptError):
    """Raised when a numerical routine fails (exit code 2)."""

    exit_code = 2


class SingularMatrixError(NumericalError):
    """Raised when the normal equations are singular and no ridge was requested."""


class NonConvergenceError(NumericalError):
    """Raised when an iterative fit stops before meeting its tolerance.

    The best iterate found so far is kept on ``partial``.
    """

    def __init__(self, message: str, *, partial: Any = None, **coords: Any) -> None:
        self.partial = partial
        super().__init__(message, **coords)
