"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: parse failures -> 4,
hypothesis/precondition failures -> 2, numerical failures -> 3.
"""

from __future__ import annotations


class SnhopfError(Exception):
    """Base class for all package errors."""


class ParseError(SnhopfError):
    """Malformed model or target file."""


class HypothesisError(SnhopfError):
    """Spectral or model hypotheses violated (resonance, non-simple root, ...)."""


class PreconditionError(SnhopfError):
    """An operation was called outside its contract."""


class NumericalError(SnhopfError):
    """A numerical computation failed its tolerance or rank requirements."""


class RankDeficiencyError(NumericalError):
    """A composite delay map is rank deficient at the requested delays."""
