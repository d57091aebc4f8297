"""Exception hierarchy shared by every module.

Each error also derives from the closest builtin so callers can catch either.
"""

from __future__ import annotations


class QuboError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(QuboError, ValueError):
    pass


class EntryIndexError(QuboError, IndexError):
    pass


class EntryValueError(QuboError, ValueError):
    pass


class TagConflictError(QuboError, ValueError):
    pass


class InstanceError(QuboError, ValueError):
    """Malformed problem input or unreadable instance file."""


class ParameterError(QuboError, ValueError):
    pass


class RefusalError(QuboError, RuntimeError):
    """The request is well-formed but deliberately not executed."""


class ConfigError(QuboError, ValueError):
    pass
