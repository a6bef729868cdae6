"""Projected system ``F c = s`` over the real-time Krylov basis.

The basis states are ``phi_l = exp(-iH l tau) b``. Because the evolutions
commute, ``F[n', n]`` and the overlap Gram matrix depend only on
``k = n - n'``, so assembly estimates one generator per ``k >= 0`` and fills
negative offsets by conjugation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DegenerateSystemError, InvalidParameterError
from .hamiltonian import PauliSum
from .overlap import DEFAULT_T_FD, ShotModel, f_element_exact, f_element_fd, s_element
from .statevector import EXACT, EvolutionBackend, evolve_many

EXACT_SVD_THRESHOLD = 1e-12
SAMPLED_THRESHOLD_FACTOR = 5.0


@dataclass(frozen=True)
class Source:
    """Where matrix elements come from.

    ``kind="exact"`` uses the statevector oracle; ``kind="finite-difference"``
    uses Hadamard tests with step ``t_fd`` and ``shots`` per circuit
    (``None`` for exact expectations).
    """

    kind: str = "exact"
    t_fd: float = DEFAULT_T_FD
    shots: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "finite-difference"):
            raise InvalidParameterError(f"unknown source kind {self.kind!r}")
        if self.kind == "finite-difference" and not self.t_fd > 0:
            raise InvalidParameterError("t_fd must be positive")

    @property
    def shot_model(self) -> Optional[ShotModel]:
        if self.kind == "exact" or self.shots is None:
            return None
        return ShotModel(self.shots, self.seed)

    def to_dict(self) -> dict:
        if self.kind == "exact":
            return {"kind": "exact"}
        return {"kind": self.kind, "t_fd": self.t_fd, "shots": self.shots, "seed": self.seed}


@dataclass
class KrylovSystem:
    M: int
    tau: float
    F: np.ndarray
    s: np.ndarray
    source: Source = field(default_factory=Source)
    element_std_error: float = 0.0

    def to_dict(self) -> dict:
        pair = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
        return {
            "M": self.M,
            "tau": self.tau,
            "F": [[pair(z) for z in row] for row in self.F],
            "s": [pair(z) for z in self.s],
            "source": self.source.to_dict(),
            "element_std_error": self.element_std_error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrylovSystem":
        to_c = lambda p: complex(p[0], p[1])  # noqa: E731
        return cls(
            M=int(data["M"]),
            tau=float(data["tau"]),
            F=np.array([[to_c(p) for p in row] for row in data["F"]], dtype=complex),
            s=np.array([to_c(p) for p in data["s"]], dtype=complex),
            source=Source(**data.get("source", {"kind": "exact"})),
            element_std_error=float(data.get("element_std_error", 0.0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "KrylovSystem":
        return cls.from_dict(json.loads(text))


@dataclass
class SolveResult:
    c: np.ndarray
    residual: float
    f_condition: float
    truncated_rank: int
    singular_values: np.ndarray


def toeplitz_from_generators(gen: np.ndarray) -> np.ndarray:
    """Hermitian Toeplitz matrix with ``T[n', n] = gen[n - n']`` for ``n >= n'``."""
    M = len(gen)
    k = np.arange(M)[None, :] - np.arange(M)[:, None]
    return np.where(k >= 0, gen[np.abs(k)], np.conj(gen[np.abs(k)]))


def hermitian_part(F: np.ndarray) -> np.ndarray:
    return 0.5 * (F + F.conj().T)


def krylov_basis(h: PauliSum, b: np.ndarray, M: int, tau: float) -> np.ndarray:
    """Rows are the basis states ``phi_l`` for ``l = 0..M-1``."""
    return evolve_many(h, np.arange(M) * tau, b)


def assemble(
    h: PauliSum,
    b: np.ndarray,
    M: int,
    tau: float,
    source: Source = Source(),
    backend: EvolutionBackend = EXACT,
) -> KrylovSystem:
    if M < 1:
        raise InvalidParameterError("M must be >= 1")
    if not tau > 0:
        raise InvalidParameterError("tau must be positive")
    shot_model = source.shot_model
    if source.kind == "exact":
        f_gen = np.array([f_element_exact(h, b, 0, k, tau) for k in range(M)])
        s = np.array([s_element(h, b, k, tau).value for k in range(M)])
        se = 0.0
    else:
        f_est = [f_element_fd(h, b, 0, k, tau, source.t_fd, shot_model, backend) for k in range(M)]
        s_est = [s_element(h, b, k, tau, shot_model, backend) for k in range(M)]
        f_gen = np.array([e.value for e in f_est])
        s = np.array([e.value for e in s_est])
        se = max(e.std_error for e in f_est)
    F = hermitian_part(toeplitz_from_generators(f_gen))
    return KrylovSystem(M, tau, F, s, source, se)


def solve(sys: KrylovSystem, svd_threshold: Optional[float] = None) -> SolveResult:
    """Truncated-SVD pseudo-inverse solve of ``F c = s``.

    Singular values below ``svd_threshold * sigma_max`` are discarded. The
    default is ``1e-12`` for noiseless systems and five element standard
    errors (relative to ``sigma_max``) for sampled ones.
    """
    F = np.asarray(sys.F, dtype=complex)
    s = np.asarray(sys.s, dtype=complex)
    u, sv, vh = np.linalg.svd(F)
    sigma_max = sv[0] if sv.size else 0.0
    if not sigma_max > 0:
        raise DegenerateSystemError("projected matrix is identically zero")
    if svd_threshold is None:
        svd_threshold = EXACT_SVD_THRESHOLD
        if sys.element_std_error > 0:
            svd_threshold = max(svd_threshold, SAMPLED_THRESHOLD_FACTOR * sys.element_std_error / sigma_max)
    keep = sv > svd_threshold * sigma_max
    rank = int(keep.sum())
    if rank == 0:
        raise DegenerateSystemError("every singular value fell below the threshold")
    c = vh[keep].conj().T @ ((u[:, keep].conj().T @ s) / sv[keep])
    sigma_min = sv[-1]
    cond = math.inf if sigma_min == 0 else float(sigma_max / sigma_min)
    residual = float(np.linalg.norm(F @ c - s))
    return SolveResult(c, residual, cond, rank, sv)


def vandermonde_matrix(M: int, tau: float) -> np.ndarray:
    """``[V]_{kl} = (-i l tau)^k / k!`` for ``k, l = 0..M-1``."""
    k = np.arange(M)[:, None]
    l = np.arange(M)[None, :]
    fact = np.array([math.factorial(i) for i in range(M)], dtype=float)[:, None]
    return (-1j * l * tau) ** k / fact


def vandermonde_map(c: np.ndarray, M: Optional[int] = None, tau: float = 1.0) -> np.ndarray:
    """Power-basis coefficients ``c_hat`` matching the evolution-basis ``c`` up to ``O(tau^M)``."""
    c = np.asarray(c, dtype=complex)
    if M is None:
        M = len(c)
    if len(c) != M:
        raise InvalidParameterError(f"expected {M} coefficients, got {len(c)}")
    return vandermonde_matrix(M, tau) @ c
