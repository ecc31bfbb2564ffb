"""
Exceptions Module
==================
Error types raised by the physics, array and estimation layers.
"""


class RaqDoaError(Exception):
    """Base class for all toolkit errors."""
    pass


class InvalidInputError(RaqDoaError, ValueError):
    """Raised when an argument violates an operation's preconditions."""
    pass


class InvalidSceneError(InvalidInputError):
    """Raised when a target scene cannot be processed (K >= M, singular R_s, ...)."""
    pass


class NumericalFailureError(RaqDoaError, ArithmeticError):
    """Raised when a numerical routine fails to converge or loses accuracy."""
    pass


class DegenerateSystemError(NumericalFailureError):
    """Raised when a steady-state null space is not one-dimensional."""
    pass


class UndefinedPhaseError(NumericalFailureError):
    """Raised when a phase is requested from a zero-modulus quantity."""
    pass


class UnboundedNoiseError(RaqDoaError):
    """Raised when the PSL noise coefficient diverges (cos(varphi) = 0)."""
    pass
