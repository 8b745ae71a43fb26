"""Exception types shared across the package."""


class QDoubleError(Exception):
    """Base class for all package errors."""


class ConfigError(QDoubleError):
    """Malformed experiment, group, lattice or Hopf specification."""


class UnsupportedGroup(QDoubleError):
    pass


class IncompleteIrrepSet(QDoubleError):
    pass


class GroupMismatch(QDoubleError):
    pass


class BadDimensions(ConfigError):
    pass


class NotARibbon(QDoubleError):
    pass


class NotOpen(QDoubleError):
    pass


class NotStronglyOpen(QDoubleError):
    pass


class EndpointMismatch(QDoubleError):
    pass


class BoundaryTooClose(QDoubleError):
    pass


class NonAdjacentSite(QDoubleError):
    pass


class SitesNotDisjoint(QDoubleError):
    pass


class LatticeMismatch(QDoubleError):
    pass


class SupportBudgetExceeded(QDoubleError):
    """A state would exceed the configured support cap."""

    def __init__(self, requested, cap):
        super().__init__(f"support {requested} exceeds cap {cap}")
        self.requested = requested
        self.cap = cap


class ToleranceExceeded(QDoubleError):
    def __init__(self, name, deviation, tolerance):
        super().__init__(f"{name}: deviation {deviation:.3e} above {tolerance:.1e}")
        self.name = name
        self.deviation = deviation
        self.tolerance = tolerance


class NotAHopfAlgebra(QDoubleError):
    pass


class NoIntegral(QDoubleError):
    pass


class UnsupportedOrientation(QDoubleError):
    pass
