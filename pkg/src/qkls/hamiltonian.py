"""Pauli-sum Hamiltonians, the Ising test family and spectral diagnostics.

Qubit ordering follows the Kronecker convention: the first character of a
Pauli string acts on the most significant bit of the basis index.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    InvalidParameterError,
    ResourceLimitError,
    SingularHamiltonianError,
)

PAULI_SYMBOLS = "IXYZ"
DENSE_QUBIT_CAP = 12
ZERO_EIGENVALUE_TOL = 1e-12

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_string(string: str, n: int) -> str:
    string = string.upper()
    if len(string) != n:
        raise InvalidParameterError(
            f"Pauli string {string!r} has length {len(string)}, expected {n}"
        )
    bad = set(string) - set(PAULI_SYMBOLS)
    if bad:
        raise InvalidParameterError(f"unknown Pauli symbols {sorted(bad)} in {string!r}")
    return string


def pauli_masks(string: str) -> tuple[int, int, int]:
    """Return ``(x_mask, z_mask, n_y)`` for a Pauli string.

    ``x_mask`` flags the qubits flipped by the string (X or Y) and ``z_mask``
    those picking up a sign (Z or Y), so that
    ``P|k> = i**n_y * (-1)**popcount(k & z_mask) |k ^ x_mask>``.
    """
    n = len(string)
    x_mask = z_mask = n_y = 0
    for pos, symbol in enumerate(string):
        bit = 1 << (n - 1 - pos)
        if symbol in "XY":
            x_mask |= bit
        if symbol in "ZY":
            z_mask |= bit
        if symbol == "Y":
            n_y += 1
    return x_mask, z_mask, n_y


def _parity(values: np.ndarray) -> np.ndarray:
    # popcount parity of a non-negative integer array
    parity = np.zeros(values.shape, dtype=np.int64)
    v = values.copy()
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    return parity


@lru_cache(maxsize=None)
def _pauli_action(string: str) -> tuple[np.ndarray, np.ndarray]:
    """Permutation and phase vectors with ``(P psi)[perm] = phase * psi``."""
    n = len(string)
    x_mask, z_mask, n_y = pauli_masks(string)
    idx = np.arange(2**n, dtype=np.int64)
    sign = 1 - 2 * _parity(idx & z_mask)
    phase = (1j**n_y) * sign.astype(complex)
    perm = idx ^ x_mask
    phase.setflags(write=False)
    perm.setflags(write=False)
    return perm, phase


def apply_pauli(string: str, psi: np.ndarray) -> np.ndarray:
    """Apply a single Pauli string to a state vector (matrix-free)."""
    perm, phase = _pauli_action(string)
    out = np.empty_like(psi, dtype=complex)
    out[perm] = phase * psi
    return out


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of n-qubit Pauli strings in canonical form.

    Instances are immutable and hashable; construct them through
    :meth:`from_terms` (or :func:`build_ising`) to get duplicate strings
    merged and terms sorted.
    """

    n: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidParameterError("a PauliSum needs at least one qubit")
        for coeff, string in self.terms:
            _check_string(string, self.n)
            if not np.isfinite(coeff) or isinstance(coeff, complex):
                raise InvalidParameterError(f"coefficient {coeff!r} is not a finite real")

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[float, str]]) -> "PauliSum":
        merged: dict[str, float] = defaultdict(float)
        for coeff, string in terms:
            if isinstance(coeff, complex) or np.iscomplexobj(coeff):
                raise InvalidParameterError("PauliSum coefficients must be real")
            merged[_check_string(string, n)] += float(coeff)
        canon = tuple(
            (coeff, string) for string, coeff in sorted(merged.items()) if coeff != 0.0
        )
        return cls(n, canon)

    def canonical(self) -> "PauliSum":
        return PauliSum.from_terms(self.n, self.terms)

    @property
    def dim(self) -> int:
        return 2**self.n

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n != other.n:
            raise InvalidParameterError("cannot add PauliSums on different qubit counts")
        return PauliSum.from_terms(self.n, self.terms + other.terms)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum.from_terms(self.n, [(factor * c, s) for c, s in self.terms])

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-free ``H @ psi``."""
        psi = np.asarray(psi, dtype=complex)
        out = np.zeros_like(psi)
        for coeff, string in self.terms:
            out += coeff * apply_pauli(string, psi)
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"coeff": coeff, "string": string} for coeff, string in self.terms],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PauliSum":
        return cls.from_terms(
            int(data["n"]), [(float(t["coeff"]), str(t["string"])) for t in data["terms"]]
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SpectralInfo:
    eigenvalues: np.ndarray
    kappa: float
    spectral_norm: float
    sparsity_d: int

    def is_normalized(self, tol: float = 1e-10) -> bool:
        """True when every ``|lambda|`` lies in ``[1/kappa, 1]`` up to ``tol``."""
        mags = np.abs(self.eigenvalues)
        return bool(
            abs(self.spectral_norm - 1.0) <= tol
            and np.all(mags >= 1.0 / self.kappa - tol)
            and np.all(mags <= 1.0 + tol)
        )


def build_ising(n: int, J: float, eta: float = 0.0, zeta: float = 1.0) -> PauliSum:
    """Transverse-field Ising chain with open boundaries, shifted and scaled.

    Returns ``(sum_j X_j + J sum_j Z_j Z_{j+1} + eta I) / zeta``.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if zeta == 0:
        raise InvalidParameterError("zeta must be nonzero")
    terms = []
    for j in range(n):
        terms.append((1.0 / zeta, "I" * j + "X" + "I" * (n - j - 1)))
    for j in range(n - 1):
        terms.append((J / zeta, "I" * j + "ZZ" + "I" * (n - j - 2)))
    terms.append((eta / zeta, "I" * n))
    return PauliSum.from_terms(n, terms)


def to_dense(h: PauliSum, max_qubits: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a PauliSum.

    Entries are scattered directly from the bit-mask action of each string,
    which avoids forming a full Kronecker product per term.
    """
    if h.n > max_qubits:
        raise ResourceLimitError(f"{h.n} qubits exceeds the dense cap of {max_qubits}")
    dim = h.dim
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for coeff, string in h.terms:
        perm, phase = _pauli_action(string)
        mat[perm, cols] += coeff * phase
    return mat


def to_dense_kron(h: PauliSum) -> np.ndarray:
    """Reference dense construction by explicit Kronecker products (small n only)."""
    mat = np.zeros((h.dim, h.dim), dtype=complex)
    for coeff, string in h.terms:
        mat += coeff * reduce(np.kron, [_PAULI_MATRICES[s] for s in string])
    return mat


@lru_cache(maxsize=32)
def eigensystem(h: PauliSum) -> tuple[np.ndarray, np.ndarray]:
    """Cached Hermitian eigendecomposition ``(eigenvalues, eigenvectors)``."""
    w, v = np.linalg.eigh(to_dense(h))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def spectral_info(h: PauliSum) -> SpectralInfo:
    w, _ = eigensystem(h)
    mags = np.abs(w)
    if np.min(mags) < ZERO_EIGENVALUE_TOL:
        raise SingularHamiltonianError("Hamiltonian has a zero eigenvalue; kappa undefined")
    dense = to_dense(h)
    scale = np.max(np.abs(dense))
    nonzero = np.abs(dense) > 1e-13 * scale
    return SpectralInfo(
        eigenvalues=np.array(w),
        kappa=float(mags.max() / mags.min()),
        spectral_norm=float(mags.max()),
        sparsity_d=int(nonzero.sum(axis=1).max()),
    )


def calibrate_kappa(n: int, J: float, target_kappa: float) -> tuple[float, float]:
    """Shift and scale for the Ising chain hitting a target condition number.

    The unshifted spectrum ``[lmin, lmax]`` is mapped onto ``[1/kappa, 1]``;
    the positive shift makes ``1/kappa`` the smallest eigenvalue.
    """
    if not target_kappa > 1:
        raise InvalidParameterError("target_kappa must be > 1")
    w, _ = eigensystem(build_ising(n, J, 0.0, 1.0))
    lmin, lmax = float(w[0]), float(w[-1])
    if lmax - lmin <= 0:
        raise InvalidParameterError("flat spectrum: no shift/scale reaches the target kappa")
    zeta = (lmax - lmin) / (1.0 - 1.0 / target_kappa)
    eta = zeta - lmax
    return eta, zeta


def random_pauli_sum(
    n: int, n_terms: int, rng: np.random.Generator, scale: float = 1.0
) -> PauliSum:
    """Random Hermitian PauliSum, used by tests and property checks."""
    terms: list[tuple[float, str]] = []
    for _ in range(n_terms):
        string = "".join(rng.choice(list(PAULI_SYMBOLS), size=n))
        terms.append((float(scale * rng.normal()), string))
    return PauliSum.from_terms(n, terms)


def parse_pauli_sum(data: "PauliSum | dict | str | Sequence") -> PauliSum:
    """Accept a PauliSum, its dict/JSON form, or a ``(n, terms)`` pair."""
    if isinstance(data, PauliSum):
        return data
    if isinstance(data, str):
        return PauliSum.from_json(data)
    if isinstance(data, dict):
        return PauliSum.from_dict(data)
    n, terms = data
    return PauliSum.from_terms(n, terms)
