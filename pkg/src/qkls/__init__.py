"""Classically simulated quantum Krylov-subspace linear solver."""

__version__ = "0.1.0"

from .estimators import FourierInverseSolver, QuantumKrylovSolver  # noqa: E402
from .exceptions import (  # noqa: E402
    ConfigError,
    DegenerateSystemError,
    DimensionMismatchError,
    InvalidParameterError,
    NullStateError,
    QKLSError,
    ResourceLimitError,
    SingularHamiltonianError,
)
from .hamiltonian import (  # noqa: E402
    PauliSum,
    SpectralInfo,
    build_ising,
    calibrate_kappa,
    spectral_info,
    to_dense,
)
from .statevector import EvolutionBackend, evolve, exact_solution, inner, prepare_b  # noqa: E402

__all__ = [
    "ConfigError",
    "DegenerateSystemError",
    "DimensionMismatchError",
    "EvolutionBackend",
    "FourierInverseSolver",
    "InvalidParameterError",
    "NullStateError",
    "PauliSum",
    "QKLSError",
    "QuantumKrylovSolver",
    "ResourceLimitError",
    "SingularHamiltonianError",
    "SpectralInfo",
    "build_ising",
    "calibrate_kappa",
    "evolve",
    "exact_solution",
    "inner",
    "prepare_b",
    "spectral_info",
    "to_dense",
]
