"""Reconstruction of ``sum_n c_n exp(-iH n tau)|b>`` by linear combination of unitaries.

Complex coefficients are handled by absorbing each phase ``c_n/|c_n|`` into
its (still unitary) select branch, so the prepare operator only needs the
nonnegative amplitudes ``sqrt(|c_n| / sum|c|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError, NullStateError
from .hamiltonian import PauliSum
from .statevector import EXACT, EvolutionBackend, evolve, inner

NULL_NORM = 1e-14


@dataclass(frozen=True)
class LCUPlan:
    m: int
    padded_coeffs: np.ndarray
    magnitudes: np.ndarray
    phases: np.ndarray
    c_norm: float

    @property
    def prepare_amplitudes(self) -> np.ndarray:
        return np.sqrt(self.magnitudes / self.c_norm)


@dataclass(frozen=True)
class LCUOutcome:
    state: np.ndarray
    success_prob: float
    expected_repetitions: float


def plan_lcu(c) -> LCUPlan:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    if c.ndim != 1 or c.size == 0 or not np.any(c):
        raise InvalidParameterError("LCU needs a nonzero coefficient vector")
    M = c.size
    m = math.ceil(math.log2(max(M, 2)))
    padded = np.zeros(2**m, dtype=complex)
    padded[:M] = c
    mags = np.abs(padded)
    phases = np.ones(2**m, dtype=complex)
    nz = mags > 0
    phases[nz] = padded[nz] / mags[nz]
    return LCUPlan(m, padded, mags, phases, float(mags.sum()))


def _outcome(v: np.ndarray, c_norm: float) -> LCUOutcome:
    norm = float(np.linalg.norm(v))
    if norm < NULL_NORM:
        raise NullStateError("linear combination has vanishing norm")
    return LCUOutcome(v / norm, (norm / c_norm) ** 2, c_norm / norm)


def combine(h: PauliSum, b: np.ndarray, c, tau: float, backend: EvolutionBackend = EXACT) -> np.ndarray:
    """Unnormalized ``sum_n c_n exp(-iH n tau) b``."""
    c = np.asarray(c, dtype=complex)
    v = np.zeros(h.dim, dtype=complex)
    for n, cn in enumerate(c):
        if cn != 0:
            v += cn * evolve(h, n * tau, b, backend)
    return v


def apply_lcu_direct(
    h: PauliSum, b: np.ndarray, c, tau: float, backend: EvolutionBackend = EXACT
) -> LCUOutcome:
    """Apply the coefficient combination directly and report the postselection statistics."""
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    return _outcome(combine(h, b, c, tau, backend), float(np.abs(c).sum()))


def _householder(a: np.ndarray) -> np.ndarray:
    """Real orthogonal reflection mapping ``e_0`` to the unit vector ``a``."""
    dim = a.size
    w = -a.astype(float)
    w[0] += 1.0
    wn = w @ w
    if wn < 1e-30:
        return np.eye(dim)
    return np.eye(dim) - 2.0 * np.outer(w, w) / wn


def apply_lcu_circuit(
    h: PauliSum,
    b: np.ndarray,
    plan: LCUPlan,
    tau: float,
    backend: EvolutionBackend = EXACT,
) -> LCUOutcome:
    """Simulate prepare, select and unprepare on the ``(m + n)``-qubit register.

    The select operator is the ladder of controlled ``exp(-iH 2^r tau)``
    gates, ancilla bit ``r`` controlling the power ``2^r``, followed by the
    absorbed branch phases. The ancillas are then projected onto ``|0^m>``.
    """
    b = np.asarray(b, dtype=complex)
    V = _householder(plan.prepare_amplitudes)
    # register[j] is the system state attached to ancilla basis state |j>
    register = np.outer(V[:, 0], b)
    branches = np.arange(2**plan.m)
    for r in range(plan.m):
        controlled = branches[(branches >> r) & 1 == 1]
        for j in controlled:
            if np.any(register[j]):
                norm = np.linalg.norm(register[j])
                register[j] = norm * evolve(h, (2**r) * tau, register[j] / norm, backend)
    register *= plan.phases[:, None]
    register = V.conj().T @ register
    projected = register[0]
    prob = float(np.vdot(projected, projected).real)
    norm = math.sqrt(prob)
    if norm * plan.c_norm < NULL_NORM:
        raise NullStateError("postselected branch has vanishing norm")
    return LCUOutcome(projected / norm, prob, 1.0 / norm)


def error_metric(approx: np.ndarray, reference: np.ndarray) -> float:
    """``|1 - |<approx, reference>||``: zero for states equal up to global phase."""
    return abs(1.0 - abs(inner(approx, reference)))
