"""Shared exception and warning types."""


class DomainError(ValueError):
    """A parameter lies outside the domain of the requested quantity."""


class ValidityError(DomainError):
    """A mixture representation was requested outside its validity range."""


class ConvergenceError(RuntimeError):
    """An iterative numerical scheme failed to reach its tolerance."""


class CancellationWarning(RuntimeWarning):
    """An alternating sum lost a significant number of digits."""


class MLRWarning(RuntimeWarning):
    """A numerically checked monotone-likelihood-ratio property failed."""
