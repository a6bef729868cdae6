"""scikit-learn compatible front ends for the Krylov solver and the Fourier baseline.

Both estimators take the Hamiltonian as a constructor parameter and are
fitted on a right-hand side ``|b>``. Fitting learns an approximate inverse
operator tuned to that right-hand side; ``transform`` applies it to states.

Example::

    h = build_ising(4, 0.1, *calibrate_kappa(4, 0.1, 27.6))
    solver = QuantumKrylovSolver(h, n_krylov=8, tau=0.05)
    x = solver.fit_transform(prepare_b(4))
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidParameterError
from .fourier import (
    FourierSchedule,
    ScheduleConstants,
    fourier_inverse,
    make_schedule,
)
from .hamiltonian import eigensystem, spectral_info
from .krylov import KrylovSystem, SolveResult, Source, assemble, solve
from .lcu import apply_lcu_circuit, apply_lcu_direct, combine, error_metric, plan_lcu
from .statevector import EvolutionBackend, exact_solution
from .validation import check_hamiltonian, check_state, check_states


class _SolverMixin:
    """Shared scoring: mean ``1 - error_metric`` against reference solutions."""

    def score(self, X, y=None) -> float:
        X = check_states(X, self.n_qubits_)
        out = self.transform(X)
        if y is None:
            ref = np.array([exact_solution(self.hamiltonian_, row) for row in X])
        else:
            ref = check_states(y, self.n_qubits_)
        return float(np.mean([1.0 - error_metric(a, r) for a, r in zip(out, ref)]))


class QuantumKrylovSolver(_SolverMixin, TransformerMixin, BaseEstimator):
    """Real-time quantum Krylov linear solver.

    Parameters
    ----------
    hamiltonian : PauliSum or its dict/JSON form
    n_krylov : int
        Subspace dimension ``M``.
    tau : float
        Time step between consecutive basis states.
    source : {"exact", "finite-difference"}
        Statevector oracle or Hadamard-test finite differences.
    t_fd : float
        Finite-difference time (finite-difference source only).
    shots : int or None
        Shots per Hadamard-test circuit; ``None`` uses exact expectations.
    svd_threshold : float or None
        Relative singular-value cutoff; ``None`` picks a source-dependent default.
    reconstruction : {"direct", "circuit"}
        Apply the learned combination directly or through the simulated LCU circuit.
    evolution : {"exact", "trotter1", "trotter2"}
    trotter_steps : int
        Steps per unit time for the Trotter modes.
    random_state : int
        Seed for the shot model.

    Attributes
    ----------
    coef_ : ndarray of shape (n_krylov,)
    system_ : KrylovSystem
    solve_result_ : SolveResult
    success_prob_ : float
        Postselection probability on the fitted right-hand side.
    """

    def __init__(
        self,
        hamiltonian=None,
        n_krylov: int = 32,
        tau: float = 1e-3,
        source: str = "exact",
        t_fd: float = 0.01,
        shots: Optional[int] = None,
        svd_threshold: Optional[float] = None,
        reconstruction: str = "direct",
        evolution: str = "exact",
        trotter_steps: int = 100,
        random_state: int = 0,
    ):
        self.hamiltonian = hamiltonian
        self.n_krylov = n_krylov
        self.tau = tau
        self.source = source
        self.t_fd = t_fd
        self.shots = shots
        self.svd_threshold = svd_threshold
        self.reconstruction = reconstruction
        self.evolution = evolution
        self.trotter_steps = trotter_steps
        self.random_state = random_state

    def _backend(self) -> EvolutionBackend:
        return EvolutionBackend(self.evolution, self.trotter_steps)

    def fit(self, X, y=None):
        h = check_hamiltonian(self.hamiltonian)
        if self.reconstruction not in ("direct", "circuit"):
            raise InvalidParameterError(f"unknown reconstruction {self.reconstruction!r}")
        b = check_state(X, h.n)
        src = Source(self.source, self.t_fd, self.shots, int(self.random_state))
        system = assemble(h, b, int(self.n_krylov), float(self.tau), src, self._backend())
        result = solve(system, self.svd_threshold)
        self.hamiltonian_ = h
        self.n_qubits_ = h.n
        self.n_features_in_ = h.dim
        self.system_: KrylovSystem = system
        self.solve_result_: SolveResult = result
        self.coef_ = result.c
        self.success_prob_ = self._reconstruct(b).success_prob
        return self

    def _reconstruct(self, b: np.ndarray):
        if self.reconstruction == "circuit":
            return apply_lcu_circuit(self.hamiltonian_, b, plan_lcu(self.coef_), self.tau, self._backend())
        return apply_lcu_direct(self.hamiltonian_, b, self.coef_, self.tau, self._backend())

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        X = check_states(X, self.n_qubits_)
        return np.array([self._reconstruct(row).state for row in X])

    def apply_operator(self, X) -> np.ndarray:
        """Unnormalized ``sum_n c_n exp(-iH n tau) x`` for each row."""
        check_is_fitted(self, "coef_")
        X = check_states(X, self.n_qubits_)
        return np.array([combine(self.hamiltonian_, row, self.coef_, self.tau, self._backend()) for row in X])


class FourierInverseSolver(_SolverMixin, TransformerMixin, BaseEstimator):
    """Fourier-approach baseline with the same estimator surface.

    Either ``epsilon`` (with ``kappa`` taken from the Hamiltonian when not
    given) sets the schedule through the asymptotic formulas, or explicit
    ``J_steps``/``K_steps`` truncate it.
    """

    def __init__(
        self,
        hamiltonian=None,
        epsilon: float = 0.1,
        kappa: Optional[float] = None,
        constants: ScheduleConstants = ScheduleConstants(),
        J_steps: Optional[int] = None,
        K_steps: Optional[int] = None,
    ):
        self.hamiltonian = hamiltonian
        self.epsilon = epsilon
        self.kappa = kappa
        self.constants = constants
        self.J_steps = J_steps
        self.K_steps = K_steps

    def fit(self, X=None, y=None):
        h = check_hamiltonian(self.hamiltonian)
        kappa = self.kappa if self.kappa is not None else spectral_info(h).kappa
        sched: FourierSchedule = make_schedule(max(kappa, 1.0 + 1e-9), self.epsilon, self.constants)
        if self.J_steps is not None or self.K_steps is not None:
            sched = sched.truncated(self.J_steps or sched.J_steps, self.K_steps or sched.K_steps)
        w, _ = eigensystem(h)
        self.hamiltonian_ = h
        self.n_qubits_ = h.n
        self.n_features_in_ = h.dim
        self.kappa_ = kappa
        self.schedule_ = sched
        self.term_count_ = sched.term_count
        self.eigen_response_ = fourier_inverse(w, sched)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "schedule_")
        X = check_states(X, self.n_qubits_)
        _, v = eigensystem(self.hamiltonian_)
        out = (v @ (self.eigen_response_[:, None] * (v.conj().T @ X.T))).T
        return out / np.linalg.norm(out, axis=1, keepdims=True)
