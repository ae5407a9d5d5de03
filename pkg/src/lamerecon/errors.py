"""Exception hierarchy for lamerecon."""

from typing import Optional


class LameReconError(Exception):
    """Base class for every error raised by lamerecon."""


class ContractViolation(LameReconError, ValueError):
    """Rank, shape or precondition failure on an operation's inputs."""


class GridMismatchError(ContractViolation):
    """Inputs live on different grids."""


class EigenvalueProximityError(LameReconError):
    """The forward factorization is singular or too ill-conditioned."""

    def __init__(self, message: str, condition_estimate: Optional[float] = None):
        super().__init__(f"{message} (k may be an eigenvalue)")
        self.condition_estimate = condition_estimate


class UnsupportedDirectionError(ContractViolation):
    """A complex direction outside the axis-pair family."""


class InsufficientDataError(ContractViolation):
    """Too few solutions or sweep values for the requested operation."""


class PositivityError(ContractViolation):
    """A parameter field that must be positive is not."""


class FieldFormatError(LameReconError):
    """A field file is malformed."""


class StageError(LameReconError):
    """A pipeline stage failed; carries the stage tag and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
