"""Exception types shared across the package."""


class ArtracError(Exception):
    """Base class for all package errors."""


class DegenerateDenominator(ArtracError, ZeroDivisionError):
    """The two-body kinematic denominator vanished (fold-back geometry)."""


class SingularSystem(ArtracError, ArithmeticError):
    """A joint's 2x2 velocity system is too ill-conditioned to solve."""


class UndefinedSlip(ArtracError, ValueError):
    """Normalized slip is 0/0: neither the wheel nor the ground moves."""


class InfeasibleRoad(ArtracError, ValueError):
    """A road segment is too short to complete its steering ramp."""


class MissingSensor(ArtracError, KeyError):
    """A detector needs a sensor channel the frame does not carry."""


class OutOfCalibratedRange(ArtracError, UserWarning):
    """Steering angle outside the range a bound profile was tuned on."""


class EmptyRange(ArtracError, ValueError):
    """An envelope was requested from an empty point cloud."""


class RankDeficient(ArtracError, ValueError):
    """Too few distinct steering angles for a polynomial fit."""


class LengthMismatch(ArtracError, ValueError):
    """Paired series have different lengths."""


class EmptySeries(ArtracError, ValueError):
    """An error metric was requested on an empty series."""


class DetectorMismatch(ArtracError, ValueError):
    """A bound profile was tuned for a different detector or sensor set."""


class ConfigError(ArtracError, ValueError):
    """A configuration file is malformed."""
