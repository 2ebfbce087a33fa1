"""Exception hierarchy shared across the engine, service and CLI."""

from __future__ import annotations


class LevelSegError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LevelSegError, ValueError):
    """A scalar parameter, grid or request payload violates its contract."""


class DecodeError(LevelSegError, ValueError):
    """Image bytes could not be decoded into a grayscale grid."""


class ProtocolError(LevelSegError, RuntimeError):
    """An interaction breaks the session protocol (bad region, bad state)."""


class RoundOrderError(ProtocolError):
    """An interaction arrived with a round index that is not the next one."""


class AmbiguousPointError(ProtocolError):
    """The seed point sits exactly on the zero level set, so the intended
    foreground/background flip cannot be inferred."""

    def __init__(self, point):
        self.point = tuple(point)
        super().__init__(
            f"phi is exactly zero at point {self.point}; cannot infer direction"
        )


class DivergenceError(LevelSegError, RuntimeError):
    """The explicit time stepper blew up (non-finite or unbounded field)."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message)


class ExperimentError(LevelSegError, RuntimeError):
    """A validation experiment could not complete (e.g. a front that never
    collapses within its deadline)."""
