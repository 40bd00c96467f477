import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gprsplit.exceptions import ConfigurationError, DomainError, StateError
from gprsplit.grid import GridSpec
from gprsplit.model import (ModelParams, deviator, energy_compose, energy_extract_T, eos_pressure,
                            eos_temperature, heat_flux, inv3, mach_numbers, metric_of,
                            state_from_primitives, stresses, temperature, pressure, thetas, det3,
                            entropy_production)

from conftest import random_tensor


def test_params_validation():
    with pytest.raises(ConfigurationError):
        ModelParams(gamma=1.0)
    with pytest.raises(ConfigurationError):
        ModelParams(tau2=0.0)
    p = ModelParams(cs=2.0, tau1=3.0, rho0=1.5)
    assert p.mu == pytest.approx(1.5 * 4 * 3 / 6)
    assert p.replace(cs=0.0).cs == 0.0


def test_eos_examples():
    p = ModelParams(gamma=1.4, cv=2.5)
    assert eos_pressure(1.0, 1.0, p) == pytest.approx(1.0)
    p = ModelParams(gamma=1.4, cv=717.14)
    assert eos_temperature(1.0, 1e5, p) == pytest.approx(1e5 / (0.4 * 717.14))
    assert eos_temperature(1.0, 1e5, p) == pytest.approx(348.6, abs=0.05)
    with pytest.raises(DomainError):
        eos_pressure(1.0, 0.0, p)
    with pytest.raises(DomainError):
        eos_temperature(-1.0, 1.0, p)


def test_metric_and_deviator():
    np.testing.assert_array_equal(metric_of(np.eye(3)), np.eye(3))
    np.testing.assert_array_equal(metric_of(np.diag([2.0, 1, 1])), np.diag([4.0, 1, 1]))
    np.testing.assert_array_equal(deviator(np.eye(3)), 0.0)
    np.testing.assert_allclose(deviator(np.diag([4.0, 1, 1])), np.diag([2.0, -1, -1]))


def test_inv_and_det_against_numpy(rng):
    M = random_tensor(rng, (5, 4), 0.5)
    np.testing.assert_allclose(inv3(M), np.linalg.inv(M), rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(det3(M), np.linalg.det(M), rtol=1e-12)


def test_energy_examples():
    p = ModelParams(cv=1.0, cs=1.0, ch=1.0)
    z = np.zeros(3)
    assert energy_compose(1.0, z, np.eye(3), z, 1.0, p) == pytest.approx(1.0)
    assert energy_compose(1.0, np.array([1.0, 0, 0]), np.eye(3), z, 0.0, p) == pytest.approx(0.5)
    assert energy_compose(1.0, z, np.diag([4.0, 1, 1]), z, 0.0, p) == pytest.approx(1.5)
    with pytest.raises(StateError):
        energy_extract_T(0.1, 1.0, np.array([1.0, 0, 0]), np.eye(3), z, p)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 100), st.integers(0, 10**6))
def test_energy_round_trip(rho, T, seed):
    r = np.random.default_rng(seed)
    p = ModelParams(cv=2.0, cs=0.7, ch=1.3)
    v = r.standard_normal(3)
    G = metric_of(random_tensor(r, (), 0.2))
    J = r.standard_normal(3)
    E = energy_compose(rho, v, G, J, T, p)
    assert energy_extract_T(E, rho, v, G, J, p) == pytest.approx(T, rel=1e-10)


def test_stress_examples():
    p = ModelParams(cs=1.0, ch=2.0)
    s, w = stresses(1.0, np.eye(3), np.zeros(3), p)
    np.testing.assert_array_equal(s, 0.0)
    s, _ = stresses(1.0, np.diag([4.0, 1, 1]), np.zeros(3), p)
    np.testing.assert_allclose(s, np.diag([8.0, -1, -1]))
    _, w = stresses(1.0, np.eye(3), np.array([1.0, 0, 0]), p)
    np.testing.assert_allclose(w, 4 * np.outer([1, 0, 0], [1, 0, 0]))


def test_heat_flux_examples():
    p = ModelParams(ch=1.0)
    np.testing.assert_array_equal(heat_flux(1.0, 2.0, np.zeros(3), p), 0.0)
    np.testing.assert_allclose(heat_flux(1.0, 2.0, np.array([1.0, 0, 0]), p), [2, 0, 0])


def test_thetas():
    p = ModelParams(tau1=1.0, cs=1.0, ch=10.0, tau2=0.01)
    t1, t2 = thetas(1.0, np.eye(3), p)
    assert t1 == pytest.approx(1 / 3) and t2 == pytest.approx(1.0)
    with pytest.raises(StateError):
        thetas(1.0, np.diag([-1.0, 1, 1]), p)


def test_mach_numbers():
    p = ModelParams(gamma=1.4)
    ma, _, _ = mach_numbers(np.array([1.0, 0, 0]), 1.0, 100.0, 1.0, p)
    assert ma == pytest.approx(8.45e-2, rel=1e-3)
    ma, _, _ = mach_numbers(np.array([1.0, 0, 0]), 1.0, 1e5, 1.0, p)
    assert ma == pytest.approx(2.67e-3, rel=2e-3)
    assert all(m == 0 for m in mach_numbers(np.zeros(3), 1.0, 1.0, 1.0, p))
    _, ms, _ = mach_numbers(np.array([1.0, 0, 0]), 1.0, 1.0, 1.0, p.replace(cs=0.0))
    assert np.isinf(ms)


def test_entropy_production_nonnegative(rng):
    p = ModelParams(tau1=0.3, tau2=0.2)
    A = random_tensor(rng, (6,), 0.2)
    J = rng.standard_normal((6, 3))
    assert np.all(entropy_production(np.ones(6), A, J, np.ones(6), p) >= 0.0)


def test_state_round_trip_on_grid(rng):
    g = GridSpec(6, 5, 0.2, 0.2, bc_x="transmissive", bc_y="periodic")
    p = ModelParams(cv=2.5)
    rho = 1 + 0.1 * rng.random(g.cell_shape)
    pr = 1 + 0.1 * rng.random(g.cell_shape)
    v = 0.1 * rng.standard_normal(g.vertex_shape + (3,))
    s = state_from_primitives(g, p, rho, v, pr)
    np.testing.assert_allclose(pressure(s, g, p), pr, rtol=1e-12)
    assert temperature(s, g, p).shape == g.cell_shape
