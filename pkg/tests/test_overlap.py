import math

import numpy as np
import pytest

from qkls.bench import linear_fit, make_instance
from qkls.exceptions import InvalidParameterError
from qkls.hamiltonian import PauliSum, build_ising, calibrate_kappa
from qkls.overlap import (
    OverlapEstimate,
    Part,
    ShotModel,
    f_element_exact,
    f_element_fd,
    hadamard_test,
    overlap,
    s_element,
)
from qkls.statevector import evolve, inner, prepare_b

from .conftest import PLUS, random_state

X = PauliSum.from_terms(1, [(1.0, "X")])
Z = PauliSum.from_terms(1, [(1.0, "Z")])


def test_identity_evolution_gives_unit_overlap(ising4):
    assert hadamard_test(ising4.h, ising4.b, 0.0, Part.REAL) == pytest.approx(1.0)
    assert hadamard_test(ising4.h, ising4.b, 0.0, Part.IMAG) == pytest.approx(0.0, abs=1e-15)
    rng = np.random.default_rng(3)
    assert hadamard_test(ising4.h, ising4.b, 0.0, "real", shots=50, rng=rng) == 1.0


@pytest.mark.parametrize("t", [0.3, 1.2, -0.8])
def test_hadamard_test_phase_convention(t):
    assert hadamard_test(X, PLUS, t, "real") == pytest.approx(math.cos(t))
    assert hadamard_test(X, PLUS, t, "imag") == pytest.approx(-math.sin(t))


def test_sampled_hadamard_test_mean():
    # Monte-Carlo over 100 seeds against the closed form cos(0.3)
    shots = 10_000
    vals = [hadamard_test(X, PLUS, 0.3, "real", shots, np.random.default_rng(s)) for s in range(100)]
    assert abs(np.mean(vals) - math.cos(0.3)) < 3 * shots**-0.5
    assert all(-1 <= v <= 1 for v in vals)


def test_shots_must_be_positive():
    with pytest.raises(InvalidParameterError):
        hadamard_test(X, PLUS, 0.1, "real", shots=0)
    with pytest.raises(InvalidParameterError):
        ShotModel(0)


def test_shot_model_deterministic():
    model = ShotModel(500, seed=11)
    a = overlap(X, PLUS, 0.4, model, key=(2, -3))
    b = overlap(X, PLUS, 0.4, model, key=(2, -3))
    c = overlap(X, PLUS, 0.4, model, key=(2, 3))
    assert a == b
    assert a.value != c.value


def test_s_element_cases(ising4):
    assert s_element(ising4.h, ising4.b, 0, 0.1).value == pytest.approx(1.0)
    est = s_element(X, PLUS, 3, 0.1)
    assert est.value == pytest.approx(complex(math.cos(0.3), math.sin(0.3)))
    assert est.exact and est.std_error == 0.0


def test_s_element_matches_statevector(ising4):
    tau = 0.07
    est = s_element(ising4.h, ising4.b, 2, tau)
    oracle = inner(evolve(ising4.h, 2 * tau, ising4.b), ising4.b)
    assert abs(est.value - oracle) < 1e-12


def test_fd_closed_form_plus_state():
    t = 0.01
    est = f_element_fd(X, PLUS, 0, 0, 0.1, t)
    assert est.value.real == pytest.approx(math.sin(t) / t, rel=1e-12)
    assert est.value.imag == pytest.approx((math.cos(t) - 1) / t, rel=1e-9)
    assert est.value.real == pytest.approx(0.99998, abs=1e-5)
    assert est.value.imag == pytest.approx(-0.005, abs=1e-5)


@pytest.mark.parametrize("t", [0.1, 0.01, 0.001])
def test_fd_zero_expectation_case(t):
    est = f_element_fd(Z, PLUS, 0, 0, 0.5, t)
    assert est.value.real == pytest.approx(0.0, abs=1e-12)
    assert est.value.imag == pytest.approx((math.cos(t) - 1) / t, abs=1e-12)


def test_fd_rejects_nonpositive_time():
    with pytest.raises(InvalidParameterError):
        f_element_fd(X, PLUS, 0, 0, 0.1, 0.0)


def test_fd_converges_to_oracle_small_instances(rng):
    for n in range(2, 7):
        inst = make_instance(n, rng.uniform(-0.5, 0.5), rng.uniform(5, 100))
        npr, nn, tau = int(rng.integers(0, 5)), int(rng.integers(0, 5)), 0.1
        exact = f_element_exact(inst.h, inst.b, npr, nn, tau)
        ts = np.array([4e-3, 2e-3, 1e-3])
        vals = np.array([f_element_fd(inst.h, inst.b, npr, nn, tau, t).value for t in ts])
        # first-order bias: intercept of the line through the estimates
        extrap = np.polyval(np.polyfit(ts, vals.real, 1), 0) + 1j * np.polyval(np.polyfit(ts, vals.imag, 1), 0)
        assert abs(extrap - exact) < 1e-5
        assert np.all(np.diff(np.abs(vals - exact)) < 0)


def test_fd_diagonal_is_expectation(ising4):
    tau = 0.2
    for n in range(3):
        phi = evolve(ising4.h, n * tau, ising4.b)
        expectation = inner(phi, ising4.h.apply(phi)).real
        est = f_element_fd(ising4.h, ising4.b, n, n, tau, 1e-4).value
        assert abs(est - expectation) < 1e-4


def test_exact_element_structure(ising4, rng):
    h, b, tau = ising4.h, random_state(rng, 4), 0.13
    for a in range(4):
        assert abs(f_element_exact(h, b, a, a, tau).imag) < 1e-12
        for c in range(4):
            e = f_element_exact(h, b, a, c, tau)
            assert abs(e - f_element_exact(h, b, a + 1, c + 1, tau)) < 1e-12
            assert abs(e - np.conj(f_element_exact(h, b, c, a, tau))) < 1e-12


def test_fd_bias_linear_in_t(ising4):
    ts = np.linspace(0.01, 0.1, 10)
    errs = [abs(f_element_fd(ising4.h, ising4.b, 0, 3, 0.1, t).value
                - f_element_exact(ising4.h, ising4.b, 0, 3, 0.1)) for t in ts]
    _, _, r2 = linear_fit(ts, errs)
    assert r2 >= 0.9


def test_sampled_fd_std_error_shrinks_with_shots(ising4):
    small = f_element_fd(ising4.h, ising4.b, 0, 1, 0.1, 0.05, ShotModel(100))
    large = f_element_fd(ising4.h, ising4.b, 0, 1, 0.1, 0.05, ShotModel(10_000))
    assert large.std_error < small.std_error
    assert large.shots == 10_000


def test_overlap_estimate_exact_bound(ising4):
    est = overlap(ising4.h, ising4.b, 0.77)
    assert isinstance(est, OverlapEstimate)
    assert abs(est.value) <= 1 + 1e-10
