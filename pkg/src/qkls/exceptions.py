"""Exception hierarchy shared by every qkls module."""


class QKLSError(Exception):
    """Base class for all errors raised by qkls."""


class InvalidParameterError(QKLSError, ValueError):
    """A scalar parameter is outside its admissible range."""


class ResourceLimitError(QKLSError):
    """The requested dense materialization exceeds the configured qubit cap."""


class SingularHamiltonianError(QKLSError, ArithmeticError):
    """The Hamiltonian has a (numerically) zero eigenvalue."""


class DimensionMismatchError(QKLSError, ValueError):
    """Two states or operators act on different Hilbert spaces."""


class DegenerateSystemError(QKLSError, ArithmeticError):
    """Every singular value of the projected system was truncated."""


class NullStateError(QKLSError, ArithmeticError):
    """A linear combination of states collapsed to (numerically) zero norm."""


class ConfigError(QKLSError, ValueError):
    """An experiment configuration failed validation."""
