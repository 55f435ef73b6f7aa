"""
Domain errors.

Every failure a caller can act on is an MJPError; the CLI maps these to
exit code 1. UsageError covers malformed invocations (exit code 2).
"""


class MJPError(RuntimeError):
    exit_code = 1


class UsageError(ValueError):
    exit_code = 2


# =====================================================
# GENERATOR / CORE
# =====================================================
class NegativeOffDiagonal(MJPError):
    pass


class RowSumNonzero(MJPError):
    pass


class AbsorbingState(MJPError):
    pass


class Reducible(MJPError):
    pass


class BadDimension(MJPError):
    pass


class UnknownName(MJPError):
    pass


class SingularSolve(MJPError):
    pass


class NotConverged(MJPError):
    pass


class NumericOverflow(MJPError):
    pass


class InvalidPath(MJPError):
    pass


# =====================================================
# BRIDGE SAMPLERS
# =====================================================
class AttemptsExhausted(MJPError):

    def __init__(self, method, max_attempts, acceptance=None):
        self.method = method
        self.max_attempts = max_attempts
        self.acceptance = acceptance

        msg = f"{method}: AttemptsExhausted after {max_attempts} attempts"
        if acceptance is not None:
            msg += f" (estimated acceptance probability {acceptance:.3g})"

        super().__init__(msg)


class NotDiagonalizable(MJPError):
    pass


class RootFindFailure(MJPError):
    pass


class SeriesTruncation(MJPError):
    pass


class RecursionDepthExceeded(MJPError):
    pass


# =====================================================
# STATISTICS / INFERENCE
# =====================================================
class ZeroOccupation(MJPError):

    def __init__(self, state, context=""):
        self.state = state
        prefix = f"{context}: " if context else ""
        super().__init__(
            f"{prefix}ZeroOccupation: state {state + 1} has zero holding time"
        )


class UnreachableEndpoint(MJPError):

    def __init__(self, x, y, t, index=None):
        self.x, self.y, self.t, self.index = x, y, t, index
        where = f" at observation {index}" if index is not None else ""
        super().__init__(
            f"UnreachableEndpoint{where}: p_{x + 1}{y + 1}({t:g}) is zero"
        )


# =====================================================
# COMMAND LINE
# =====================================================
class UnknownFlag(UsageError):
    pass


class MissingRequired(UsageError):
    pass


class ConflictingFlags(UsageError):
    pass
