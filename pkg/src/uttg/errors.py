"""Exception hierarchy shared across the engine."""


class UttgError(Exception):
    """Base class for all engine errors."""


class InvalidDurationError(UttgError):
    """A segment duration is zero, negative, or non-finite."""


class InvalidParameterError(UttgError):
    """A tuning parameter is outside its valid range."""


class SingularSystemError(UttgError):
    """A banded factorization hit a pivot below the relative tolerance."""


class OutOfLimitsError(UttgError):
    """A joint state violates the robot's position limits."""


class TimeAllocationError(UttgError):
    """Duration dilation failed to produce a limit-compliant trajectory."""


class StaleInputError(UttgError):
    """An input sample arrived with a non-monotonic timestamp."""


class UrdfError(UttgError):
    """Base class for robot-description problems."""


class UrdfParseError(UrdfError):
    """The document is not well-formed XML or lacks a robot root."""


class UrdfValidationError(UrdfError):
    """A joint is missing required data (e.g. limits on a revolute joint)."""


class UrdfTopologyError(UrdfError):
    """The link/joint graph is disconnected or cyclic."""


class ChainResolutionError(UrdfError):
    """No unique serial chain connects the requested base and tip links."""


class InputFormatError(UttgError):
    """A CSV/JSON input does not match the documented schema."""
