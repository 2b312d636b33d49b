"""Exception types shared across the toolkit.

Every error raised by the library derives from LpxError so callers (CLI,
service) can map failures to exit codes / HTTP statuses in one place.
Input-shaped problems derive from InputError, solver/numerical problems
from ComputeError.
"""

from __future__ import annotations

from dataclasses import dataclass


class LpxError(Exception):
    """Base class for all library errors."""


class InputError(LpxError):
    """User-supplied data is malformed or inconsistent."""


class ComputeError(LpxError):
    """The computation itself failed (solver, linear algebra, pipeline)."""


@dataclass(frozen=True)
class Violation:
    """One structured validation finding: machine-readable code plus context."""

    code: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.field}: {self.message}"


class SnapshotValidationError(InputError):
    """Raised by validate_snapshot with the full list of violations found."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))

    @property
    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


# Violation codes reported by validate_snapshot.
DIMENSION_MISMATCH = "DimensionMismatch"
NON_FINITE_ENTRY = "NonFiniteEntry"
BOUND_ORDER_VIOLATION = "BoundOrderViolation"
DUPLICATE_ID = "DuplicateId"
MISSING_FIELD = "MissingField"
BAD_TYPE = "BadType"


class Unbounded(ComputeError):
    """LP cost direction with no binding constraint; carries the MV index."""

    def __init__(self, mv_index: int, message: str = ""):
        self.mv_index = mv_index
        super().__init__(message or f"LP is unbounded along MV index {mv_index}")


class NoInServiceMV(InputError):
    def __init__(self) -> None:
        super().__init__("snapshot has no in-service manipulated variable")


class TooManyVariables(InputError):
    def __init__(self, n: int, limit: int):
        self.n = n
        self.limit = limit
        super().__init__(f"vertex enumeration limited to {limit} MVs, got {n}")


class SolverStall(ComputeError):
    """Iteration limit exceeded; indicates a solver bug or hostile input."""


class NonSquareActiveSet(ComputeError):
    def __init__(self, n_mv_u: int, n_cv_c: int):
        self.n_mv_u = n_mv_u
        self.n_cv_c = n_cv_c
        super().__init__(
            f"active set is not square: {n_mv_u} free MVs vs {n_cv_c} constrained CVs"
        )


class SingularActiveMatrix(ComputeError):
    def __init__(self, detail: str = ""):
        super().__init__(f"active gain matrix is singular{': ' + detail if detail else ''}")


class DualMismatch(ComputeError):
    """Analytic shadow prices disagree with the solver duals."""


class ZeroColumn(ComputeError):
    def __init__(self, column: int):
        self.column = column
        super().__init__(
            f"contribution column {column} is numerically zero; "
            "the CV is unreachable from every free MV"
        )


class NotApplicable(LpxError):
    """The requested analysis does not apply to this active set."""


class OutOfOrderTimestamp(InputError):
    def __init__(self, previous: str, current: str):
        super().__init__(f"snapshot at {current!r} is not after {previous!r}")


class EmptyHistory(InputError):
    def __init__(self) -> None:
        super().__init__("history contains no intervals")


class IdMismatch(InputError):
    """Live document and history report refer to different variable ids."""


class StageError(ComputeError):
    """Wraps an error raised inside the explanation pipeline with its stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
