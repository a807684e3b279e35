"""Exception hierarchy for the relaying package."""

from __future__ import annotations

from typing import Optional


class RelayBoundsError(Exception):
    """Base error; `parameter` names the offending input when known."""

    def __init__(self, message: str, parameter: Optional[str] = None):
        super().__init__(message)
        self.parameter = parameter


class InvalidArgumentError(RelayBoundsError, ValueError):
    pass


class UnboundedRegionError(RelayBoundsError):
    pass


class EmptyRegionError(RelayBoundsError):
    pass


class UnsupportedBoundError(RelayBoundsError):
    pass


class ResourceLimitError(RelayBoundsError):
    pass


class SolverError(RelayBoundsError):
    pass
