"""Exception hierarchy shared by every module."""


class LcsError(Exception):
    """Base class for all errors raised by lcsdom."""


class DimensionMismatch(LcsError, ValueError):
    pass


class SingularMatrix(LcsError):
    pass


class NotSymmetric(LcsError, ValueError):
    pass


class NoConvergence(LcsError):
    pass


class DimensionTooLarge(LcsError, ValueError):
    pass


class RayTermination(LcsError):
    """Lemke's method left along a secondary ray without reaching a solution."""


class PivotLimitExceeded(LcsError):
    pass


class PoleHit(LcsError):
    pass


class PoleOnShiftedAxis(LcsError):
    pass


class UnsupportedRelation(LcsError, ValueError):
    pass


class SingularStepMatrix(LcsError):
    pass


class InitialConditionInfeasible(LcsError):
    pass


class LcpFailure(LcsError):
    """An LCP solve failed at a given simulation step."""

    def __init__(self, step, state, cause):
        self.step = step
        self.state = state
        self.cause = cause
        super().__init__(f"LCP solve failed at step {step} (x={[float(v) for v in state]}): {cause}")


class MisalignedPair(LcsError, ValueError):
    pass


class ConfigError(LcsError, ValueError):
    pass
