"""Exception and warning types shared across the package."""

from __future__ import annotations


class AnnealError(Exception):
    """Base class for all errors raised by this package."""


class DisconnectedInput(AnnealError):
    """The input graph is not connected."""


class NonPositiveWeight(AnnealError):
    """An edge weight is zero, negative, or not finite."""


class BadVertexIndex(AnnealError):
    """An edge endpoint is outside [0, n) or forms a self-loop."""


class IndexOutOfRange(AnnealError, IndexError):
    """An edge index is outside [0, m)."""


class InstanceFormatError(AnnealError):
    """An instance file violates the line-oriented format contract."""


class NegativeArgument(AnnealError):
    """Lambert W principal branch needs a nonnegative argument."""


class DomainError(AnnealError):
    """A parameter formula was evaluated outside its stated range."""


class CapExceeded(AnnealError):
    """Enumeration found more objects than the caller's cap allows."""


class NotASpanningTree(AnnealError):
    """The edge subset is not a spanning tree of the graph."""


class DisconnectedState(AnnealError):
    """A structural query needs a connected solution state."""


class TelemetryMissing(AnnealError):
    """The run record lacks the telemetry the analysis needs."""


class InfeasibleSpec(AnnealError):
    """A generator spec asks for an impossible graph."""


class NotSeparated(AnnealError):
    """The instance does not satisfy the multiplicative weight gap."""


class ConstraintViolation(UserWarning):
    """A derived parameter landed outside the range its guarantees assume.

    Computation proceeds; reports flag the affected run as out-of-regime.
    """
