"""Input checks for state arrays and Hamiltonian parameters.

sklearn's ``check_array`` rejects complex input, so states get their own
validator with the same return conventions (2-D, one state per row).
"""
from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError
from .hamiltonian import PauliSum, parse_pauli_sum


def check_hamiltonian(h) -> PauliSum:
    if h is None:
        raise InvalidParameterError("a Hamiltonian is required")
    try:
        return parse_pauli_sum(h)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParameterError):
            raise
        raise InvalidParameterError(f"cannot interpret {h!r} as a PauliSum") from exc


def check_states(X, n_qubits: int | None = None, normalize: bool = True) -> np.ndarray:
    """Return ``X`` as a 2-D complex array of (optionally normalized) states.

    A 1-D input is treated as a single state. Every row must have power-of-two
    length matching ``n_qubits`` when given, finite entries and nonzero norm.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidParameterError(f"expected a state or a 2-D batch of states, got shape {X.shape}")
    dim = X.shape[1]
    if dim < 2 or dim & (dim - 1):
        raise DimensionMismatchError(f"state length {dim} is not a power of two >= 2")
    if n_qubits is not None and dim != 2**n_qubits:
        raise DimensionMismatchError(f"state length {dim} does not match {n_qubits} qubits")
    if not np.all(np.isfinite(X)):
        raise InvalidParameterError("states contain NaN or infinite amplitudes")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise InvalidParameterError("zero vector is not a valid state")
    return X / norms[:, None] if normalize else X.copy()


def check_state(x, n_qubits: int | None = None) -> np.ndarray:
    """Single normalized state as a 1-D array."""
    X = check_states(x, n_qubits)
    if X.shape[0] != 1:
        raise InvalidParameterError(f"expected a single state, got {X.shape[0]}")
    return X[0]
