"""Exception types raised across the toolkit."""


class MonopoleKitError(Exception):
    """Base class for all toolkit errors."""


# clifford
class NotSelfDual(MonopoleKitError, ValueError):
    pass


# lattice
class DimensionMismatch(MonopoleKitError, ValueError):
    pass


class DegenerateReference(MonopoleKitError, ValueError):
    pass


class OnWall(MonopoleKitError, ValueError):
    pass


class IndexOutOfRange(MonopoleKitError, IndexError):
    pass


class WallPosition(MonopoleKitError, ValueError):
    pass


class PreconditionViolated(MonopoleKitError, ValueError):
    """Raised when an input lies outside an operation's domain.

    ``certificate`` optionally carries the arithmetic showing why.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


# grid
class ZeroSpinor(MonopoleKitError, ValueError):
    pass


class NonUnitPhase(MonopoleKitError, ValueError):
    pass


class Diverged(MonopoleKitError, RuntimeError):
    pass


# vortex
class NoSolution(MonopoleKitError):
    """The Kazdan-Warner equation has no solution; ``certificate`` explains."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate or {}


class MaxIterations(MonopoleKitError, RuntimeError):
    pass


class ResidualTooLarge(MonopoleKitError, ArithmeticError):
    pass


class NonZeroMean(MonopoleKitError, ValueError):
    pass


# cli
class ConfigError(MonopoleKitError, ValueError):
    pass
