"""Hadamard-test overlap estimation and finite-difference matrix elements.

Every estimator collapses ``<b| e^{iHn'tau} U e^{-iHn tau} |b>`` to a single
evolution of the combined time, which is exact because all evolutions
generated by the same H commute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .exceptions import InvalidParameterError
from .hamiltonian import PauliSum
from .statevector import EXACT, EvolutionBackend, evolve, inner

DEFAULT_T_FD = 0.01


class Part(str, Enum):
    REAL = "real"
    IMAG = "imag"


@dataclass(frozen=True)
class ShotModel:
    """Sampling configuration; ``seed`` fixes every derived random stream."""

    shots_per_circuit: int
    seed: int = 0

    def __post_init__(self):
        if int(self.shots_per_circuit) <= 0:
            raise InvalidParameterError("shots_per_circuit must be positive")

    def rng(self, *key: int) -> np.random.Generator:
        # Independent stream per (seed, key...); keys may be negative.
        words = [int(self.seed) & 0xFFFFFFFF]
        for k in key:
            words.extend([int(k) & 0xFFFFFFFF, int(k < 0)])
        return np.random.default_rng(np.random.SeedSequence(words))


@dataclass(frozen=True)
class OverlapEstimate:
    """Complex overlap estimate; ``shots is None`` marks exact expectation."""

    value: complex
    shots: Optional[int] = None
    std_error_real: float = 0.0
    std_error_imag: float = 0.0

    @property
    def exact(self) -> bool:
        return self.shots is None

    @property
    def std_error(self) -> float:
        return math.hypot(self.std_error_real, self.std_error_imag)


def _part_code(part: Part) -> int:
    return 0 if Part(part) is Part.REAL else 1


def ancilla_zero_probability(
    h: PauliSum,
    b: np.ndarray,
    total_time: float,
    part: Part | str = Part.REAL,
    backend: EvolutionBackend = EXACT,
) -> float:
    """Probability that the Hadamard-test ancilla reads 0.

    The circuit is H - controlled-U - [S^dagger for the imaginary part] - H;
    the 0-branch of the ancilla holds ``(b + phase * U b) / 2``.
    """
    ub = evolve(h, total_time, b, backend)
    phase = 1.0 if Part(part) is Part.REAL else -1j
    branch0 = 0.5 * (b + phase * ub)
    return float(np.clip(np.vdot(branch0, branch0).real, 0.0, 1.0))


def hadamard_test(
    h: PauliSum,
    b: np.ndarray,
    total_time: float,
    part: Part | str = Part.REAL,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    backend: EvolutionBackend = EXACT,
) -> float:
    """Estimate Re or Im of ``<b|exp(-iH total_time)|b>``.

    With ``shots=None`` the exact ancilla expectation ``2 P(0) - 1`` is
    returned; otherwise ``shots`` Bernoulli outcomes are drawn from ``rng``.
    """
    if not math.isfinite(total_time):
        raise InvalidParameterError("total_time must be finite")
    p0 = ancilla_zero_probability(h, b, total_time, part, backend)
    if shots is None:
        return 2.0 * p0 - 1.0
    if shots <= 0:
        raise InvalidParameterError("shots must be positive")
    if rng is None:
        rng = np.random.default_rng()
    zeros = rng.binomial(int(shots), p0)
    return 2.0 * zeros / shots - 1.0


def _component_se(value: float, shots: Optional[int]) -> float:
    if shots is None:
        return 0.0
    return math.sqrt(max(1.0 - value * value, 0.0) / shots)


def overlap(
    h: PauliSum,
    b: np.ndarray,
    total_time: float,
    shot_model: Optional[ShotModel] = None,
    key: tuple[int, ...] = (),
    backend: EvolutionBackend = EXACT,
) -> OverlapEstimate:
    """Both components of ``<b|exp(-iH total_time)|b>`` from two Hadamard tests."""
    shots = None if shot_model is None else shot_model.shots_per_circuit
    parts = []
    for part in (Part.REAL, Part.IMAG):
        rng = None if shot_model is None else shot_model.rng(*key, _part_code(part))
        parts.append(hadamard_test(h, b, total_time, part, shots, rng, backend))
    re, im = parts
    return OverlapEstimate(
        complex(re, im), shots, _component_se(re, shots), _component_se(im, shots)
    )


def s_element(
    h: PauliSum,
    b: np.ndarray,
    n_prime: int,
    tau: float,
    shot_model: Optional[ShotModel] = None,
    backend: EvolutionBackend = EXACT,
) -> OverlapEstimate:
    """``<phi_{n'}|phi_0> = <b|exp(+iH n' tau)|b>``."""
    if n_prime < 0:
        raise InvalidParameterError("n_prime must be >= 0")
    return overlap(h, b, -n_prime * tau, shot_model, key=(0, n_prime), backend=backend)


def f_element_fd(
    h: PauliSum,
    b: np.ndarray,
    n_prime: int,
    n: int,
    tau: float,
    t_fd: float = DEFAULT_T_FD,
    shot_model: Optional[ShotModel] = None,
    backend: EvolutionBackend = EXACT,
) -> OverlapEstimate:
    """Forward-difference estimate of ``<phi_{n'}|H|phi_n>``.

    With ``A = <b|e^{-iH(k tau + t_fd)}|b>``, ``B = <b|e^{-iH k tau}|b>`` and
    ``k = n - n'``, the expansion ``A = B - i t_fd <H> + O(t_fd^2)`` gives

        Re<H> = (Im B - Im A) / t_fd,    Im<H> = (Re A - Re B) / t_fd,

    with a bias of order ``t_fd``.
    """
    if not t_fd > 0:
        raise InvalidParameterError("t_fd must be positive")
    k = n - n_prime
    a = overlap(h, b, k * tau + t_fd, shot_model, key=(1, k, 1), backend=backend)
    bb = overlap(h, b, k * tau, shot_model, key=(1, k, 0), backend=backend)
    value = complex(
        (bb.value.imag - a.value.imag) / t_fd, (a.value.real - bb.value.real) / t_fd
    )
    return OverlapEstimate(
        value,
        a.shots,
        math.hypot(a.std_error_imag, bb.std_error_imag) / t_fd,
        math.hypot(a.std_error_real, bb.std_error_real) / t_fd,
    )


def f_element_exact(h: PauliSum, b: np.ndarray, n_prime: int, n: int, tau: float) -> complex:
    """Statevector oracle ``<evolve(n' tau) b| H |evolve(n tau) b>``."""
    bra = evolve(h, n_prime * tau, b)
    ket = evolve(h, n * tau, b)
    return inner(bra, h.apply(ket))
