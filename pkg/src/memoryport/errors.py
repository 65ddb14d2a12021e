"""Exception types raised across the package."""


class MemoryPortError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MemoryPortError, ValueError):
    pass


class NonFiniteInput(MemoryPortError, ValueError):
    pass


class ShapingError(MemoryPortError):
    """Coupling construction failed for the requested target."""


class InfeasibleTarget(ShapingError):
    pass


class SpinDepletion(ShapingError):
    pass


class InvalidBranch(ShapingError):
    """A sign flip was requested where the spin amplitude does not vanish."""


class NonUnitary(MemoryPortError, ValueError):
    pass


class ScheduleOverlap(MemoryPortError, ValueError):
    pass


class NonPassive(MemoryPortError, ValueError):
    pass


class NonPhysicalState(MemoryPortError, ValueError):
    pass


class UnsupportedPartition(MemoryPortError, ValueError):
    pass


class QuadratureFailure(MemoryPortError):
    pass


class ConfigError(MemoryPortError, ValueError):
    pass
