"""Exception and warning types raised across the package."""


class CavityWalkError(Exception):
    """Base class for all package errors."""


class NotHermitian(CavityWalkError, ValueError):
    pass


class DimensionMismatch(CavityWalkError, ValueError):
    pass


class InsufficientData(CavityWalkError, ValueError):
    pass


class DegenerateAbscissa(CavityWalkError, ValueError):
    pass


class InvalidTheta(CavityWalkError, ValueError):
    pass


class ZeroDetuning(CavityWalkError, ZeroDivisionError):
    pass


class ZeroDriveDetuning(CavityWalkError, ZeroDivisionError):
    pass


class ConfigError(CavityWalkError, ValueError):
    pass


class NumericalGuardError(CavityWalkError, RuntimeError):
    """A numerical guard tripped; the CLI maps these to exit status 2."""


class StepTooLarge(NumericalGuardError):
    pass


class TruncationSuspect(NumericalGuardError):
    pass


class DispersiveRegimeWarning(UserWarning):
    pass


class UnboundedSigmaWarning(UserWarning):
    pass
