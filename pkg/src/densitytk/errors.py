"""Exception types shared across the toolkit.

The CLI maps these onto exit codes (see cli.py); the classes themselves
only classify what went wrong.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


class ParseError(ToolkitError):
    """Input is not well-formed: bad JSON, bad rational literal, wrong type."""


class ValidationError(ToolkitError):
    """Structurally readable input that violates a documented invariant."""

    def __init__(self, message: str, location: str = "") -> None:
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class HorizonExceeded(ValidationError):
    """Query beyond the horizon of a sampled index set."""


class EmptyIndexPrefix(ValidationError):
    """The index prefix I ∧ N is empty where a nonempty one is required."""


class NoPositivePoint(ValidationError):
    """A positive-weight witness was requested but no point has positive weight."""


class TooLargeForOracle(ValidationError):
    """Family prefix too large for exhaustive subset enumeration."""


class PrefixDensityTooLow(ValidationError):
    """The checkpoint fails the prefix-ratio admission test |I0 ∧ η|/η > b."""


class ProfileInfeasible(ValidationError):
    """Instance generation could not satisfy the profile within its attempt budget."""


class UnknownCommand(ValidationError):
    """Command name not recognized by the dispatcher."""


class CertificateError(ToolkitError):
    """A certified hypothesis fails at the requested truncation."""


class HypothesisViolation(CertificateError):
    """|T(f_n)| <= r for some index where the functional bound was required."""


class TailViolation(CertificateError):
    """|f_n(x_k)| <= r somewhere in the tail window of the witness points."""
