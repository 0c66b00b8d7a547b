"""Exception types shared across the package."""


class FunnelNavError(Exception):
    """Base class for all funnelnav errors."""


class ConfigError(FunnelNavError):
    """A configuration file is malformed or inconsistent."""


class EmptyMatchError(FunnelNavError):
    """A statistic was requested on an empty match set."""


class DegenerateSpreadError(FunnelNavError):
    """Standard-deviation ratio undefined: too few pairs or zero keyframe spread."""


class TeachDegenerateError(FunnelNavError):
    """The teach drive saw too few landmarks to build a visual path."""


class InvalidPathError(FunnelNavError):
    """A visual path violates its structural invariants."""
