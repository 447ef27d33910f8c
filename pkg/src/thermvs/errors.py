"""Exception hierarchy shared across the package."""


class ThermVSError(Exception):
    """Base class for all package errors."""


class CharLibError(ThermVSError, ValueError):
    """Malformed or invariant-violating characterization library."""


class RangeError(ThermVSError, ValueError):
    """Query outside the tabulated range of a surface (no extrapolation)."""


class DesignError(ThermVSError, ValueError):
    """Malformed or invariant-violating design document."""


class ThermalError(ThermVSError, RuntimeError):
    """Thermal solver failed to converge."""


class InfeasibleError(ThermVSError, RuntimeError):
    """No voltage pair satisfies the timing constraint."""


class JunctionCapError(InfeasibleError):
    """A tile temperature exceeded the 100 C junction cap."""
