"""Exception types shared across the package.

Every error carries a stable short code (the hyphenated string in the
message prefix) so CLI consumers can match on it without parsing prose.
"""

from __future__ import annotations


class RydgateError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, detail: str):
        super().__init__(f"{self.code}: {detail}")
        self.detail = detail


class MissingParameterError(RydgateError):
    code = "missing-parameter"


class InvalidParameterError(RydgateError):
    code = "invalid-parameter"


class InvalidSeparationError(RydgateError):
    code = "invalid-separation"


class ModelMismatchError(RydgateError):
    code = "model-mismatch"


class OutOfScheduleError(RydgateError):
    code = "out-of-schedule"


class GapClosureError(RydgateError):
    code = "gap-closure"

    def __init__(self, detail: str, time: float | None = None):
        super().__init__(detail)
        self.time = time


class StiffFailureError(RydgateError):
    code = "stiff-failure"

    def __init__(self, detail: str, time: float | None = None):
        super().__init__(detail)
        self.time = time


class PhaseUnreachableError(RydgateError):
    code = "phase-unreachable"

    def __init__(self, detail: str, max_phase: float | None = None):
        super().__init__(detail)
        self.max_phase = max_phase


class QuadratureUnconvergedError(RydgateError):
    code = "quadrature-unconverged"


class InfeasibleProblemError(RydgateError):
    code = "infeasible-problem"
