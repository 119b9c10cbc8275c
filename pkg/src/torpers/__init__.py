"""Refined discrete invariants of multigraded persistence modules over GF(p)."""

__version__ = "0.1.0"


class ValidationError(Exception):
    """Bad user input: malformed file, inconsistent complex, non-prime field."""


class InternalCheckError(Exception):
    """A redundant internal cross-check failed; results cannot be trusted."""
