class BellboundError(Exception):
    """Base class for errors raised by bellbound services."""


class DomainError(BellboundError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ShapeError(BellboundError, ValueError):
    """Two objects that must share a scenario do not."""


class CapacityError(BellboundError, RuntimeError):
    """A requested enumeration exceeds the configured size guard."""
