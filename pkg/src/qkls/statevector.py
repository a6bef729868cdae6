"""State preparation and time evolution ``exp(-iHt)`` on dense state vectors.

States are plain complex numpy arrays of length ``2**n``. Every evolution
renormalizes its output; global phases are kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError, SingularHamiltonianError
from .hamiltonian import ZERO_EIGENVALUE_TOL, PauliSum, apply_pauli, eigensystem


class EvolutionMode(str, Enum):
    EXACT = "exact"
    TROTTER1 = "trotter1"
    TROTTER2 = "trotter2"


@dataclass(frozen=True)
class EvolutionBackend:
    """How ``exp(-iHt)`` is realized.

    Trotter modes use ``ceil(|t| * steps_per_unit_time)`` product-formula
    steps; ``steps_per_unit_time`` is ignored in exact mode.
    """

    mode: EvolutionMode = EvolutionMode.EXACT
    steps_per_unit_time: int = 100

    def __post_init__(self):
        object.__setattr__(self, "mode", EvolutionMode(self.mode))
        if self.mode is not EvolutionMode.EXACT and int(self.steps_per_unit_time) < 1:
            raise InvalidParameterError("steps_per_unit_time must be a positive integer")

    def n_steps(self, t: float) -> int:
        return max(1, math.ceil(abs(t) * self.steps_per_unit_time))


EXACT = EvolutionBackend()


def normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi)


def basis_state(n: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[index] = 1.0
    return psi


def prepare_b(n: int) -> np.ndarray:
    """``H^{(x)n}|0>``: the uniform superposition over ``2**n`` basis states."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    return np.full(2**n, 2.0 ** (-n / 2), dtype=complex)


def inner(psi: np.ndarray, phi: np.ndarray) -> complex:
    """``<psi|phi>``, conjugating the first argument."""
    if psi.shape != phi.shape:
        raise DimensionMismatchError(f"state shapes differ: {psi.shape} vs {phi.shape}")
    return complex(np.vdot(psi, phi))


def _check_dim(h: PauliSum, psi: np.ndarray) -> None:
    if psi.shape != (h.dim,):
        raise DimensionMismatchError(
            f"state of shape {psi.shape} does not match a {h.n}-qubit Hamiltonian"
        )


def _rotate(string: str, theta: float, psi: np.ndarray) -> np.ndarray:
    # exp(-i theta P) = cos(theta) I - i sin(theta) P, since P^2 = I
    if set(string) == {"I"}:
        return np.exp(-1j * theta) * psi
    return math.cos(theta) * psi - 1j * math.sin(theta) * apply_pauli(string, psi)


def _trotter(h: PauliSum, t: float, psi: np.ndarray, order: int, steps: int) -> np.ndarray:
    dt = t / steps
    terms = h.terms
    for _ in range(steps):
        if order == 1:
            for coeff, string in terms:
                psi = _rotate(string, coeff * dt, psi)
        else:
            for coeff, string in terms:
                psi = _rotate(string, coeff * dt / 2, psi)
            for coeff, string in reversed(terms):
                psi = _rotate(string, coeff * dt / 2, psi)
    return psi


def evolve(
    h: PauliSum, t: float, psi: np.ndarray, backend: EvolutionBackend = EXACT
) -> np.ndarray:
    """Return ``exp(-iHt) psi`` (renormalized). Negative ``t`` inverts."""
    psi = np.asarray(psi, dtype=complex)
    _check_dim(h, psi)
    if t == 0:
        return psi.copy()
    if backend.mode is EvolutionMode.EXACT:
        w, v = eigensystem(h)
        out = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))
    else:
        order = 1 if backend.mode is EvolutionMode.TROTTER1 else 2
        out = _trotter(h, t, psi, order, backend.n_steps(t))
    return normalize(out)


def evolve_many(h: PauliSum, times: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Exact evolution to several times at once; rows of the result are states."""
    psi = np.asarray(psi, dtype=complex)
    _check_dim(h, psi)
    w, v = eigensystem(h)
    coeffs = v.conj().T @ psi
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w))
    states = (phases * coeffs) @ v.T
    return states / np.linalg.norm(states, axis=1, keepdims=True)


def exact_solution(h: PauliSum, b: np.ndarray) -> np.ndarray:
    """Normalized ``H^{-1} b`` via the eigendecomposition."""
    b = np.asarray(b, dtype=complex)
    _check_dim(h, b)
    w, v = eigensystem(h)
    if np.min(np.abs(w)) < ZERO_EIGENVALUE_TOL:
        raise SingularHamiltonianError("cannot invert a singular Hamiltonian")
    return normalize(v @ ((v.conj().T @ b) / w))
