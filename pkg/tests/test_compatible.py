import numpy as np
import pytest

from gprsplit.compatible import (curl_diagnostics, relax_A, rescale_det, transport_A, update_A,
                                 update_energy_final, update_J)
from gprsplit.exceptions import StateError
from gprsplit.grid import GridSpec, grad_cp
from gprsplit.model import ModelParams, det3, deviator, metric_of

from conftest import random_tensor

EYE = np.eye(3)


def _gradient_rows(rng, g, n_rows):
    """Rows that are discrete gradients of random vertex potentials (third entry constant)."""
    rows = []
    for i in range(n_rows):
        phi = 0.005 * rng.standard_normal(g.vertex_shape)
        row = grad_cp(phi, g)
        row[..., i % 3] += 1.0
        rows.append(row)
    return np.stack(rows, axis=-2)


def _smooth_velocity(g, rng):
    X, Y = g.vertices()
    a, b = rng.uniform(0.5, 1.5, 2)
    v = np.zeros(g.vertex_shape + (3,))
    v[..., 0] = 0.3 * np.sin(2 * np.pi * X / (g.nx * g.dx) + a) * np.cos(2 * np.pi * Y / (g.ny * g.dy))
    v[..., 1] = 0.2 * np.cos(2 * np.pi * X / (g.nx * g.dx)) * np.sin(2 * np.pi * Y / (g.ny * g.dy) + b)
    v[..., 2] = 0.1 * np.sin(2 * np.pi * X / (g.nx * g.dx))
    return v


def test_no_motion_no_relaxation_is_identity(rng):
    g = GridSpec(5, 4, 0.2, 0.25)
    p = ModelParams()
    A = random_tensor(rng, g.cell_shape, 0.1)
    out = update_A(A, np.zeros(g.vertex_shape + (3,)), p.rho0 * det3(A), np.zeros(g.cell_shape),
                   0.1, g, p)
    np.testing.assert_allclose(out, A, rtol=1e-14)


def test_rescale_factor():
    A = np.broadcast_to(2 * EYE, (2, 2, 3, 3))
    np.testing.assert_allclose(rescale_det(A, np.ones((2, 2)), 1.0), np.broadcast_to(EYE, A.shape))
    with pytest.raises(StateError):
        rescale_det(-A, np.ones((2, 2)), 1.0)


def test_inverted_cell_after_transport():
    g = GridSpec(4, 4, 0.25, 0.25)
    A = np.broadcast_to(EYE, g.cell_shape + (3, 3)).copy()
    A[1, 1] = np.diag([-1.0, 1.0, 1.0])
    with pytest.raises(StateError):
        update_A(A, np.zeros(g.vertex_shape + (3,)), np.ones(g.cell_shape),
                 np.zeros(g.cell_shape), 0.1, g, ModelParams())


def test_curl_free_rows_stay_curl_free(rng):
    g = GridSpec(16, 12, 1 / 16, 1 / 12)
    A = _gradient_rows(rng, g, 3)
    J = _gradient_rows(rng, g, 1)[..., 0, :]
    p = ModelParams(tau1=1e20, tau2=1e20)
    dt = 0.002
    for _ in range(50):
        v = _smooth_velocity(g, rng)
        A = update_A(A, v, None, np.zeros(g.cell_shape), dt, g, p, rescale=False)
        J = update_J(J, v, dt, p.tau2, g)
    rows, cj = curl_diagnostics(A, J, g)
    assert rows.max() <= 1e-12
    assert cj <= 1e-12


def test_J_relaxation():
    g = GridSpec(4, 4, 0.25, 0.25)
    J = np.random.default_rng(0).standard_normal(g.cell_shape + (3,))
    v = np.zeros(g.vertex_shape + (3,))
    np.testing.assert_allclose(update_J(J, v, 0.1, 1e300, g), J, rtol=1e-15)
    np.testing.assert_allclose(update_J(J, v, 0.1, 0.05, g), J / 3.0, rtol=1e-15)


def test_relaxation_reduces_deviator(rng):
    A = random_tensor(rng, (20,), 0.2)
    for kappa in (0.1, 1.0, 100.0):
        B = relax_A(A, np.full(20, kappa))
        assert np.all(np.linalg.norm(deviator(metric_of(B)), axis=(-2, -1))
                      <= np.linalg.norm(deviator(metric_of(A)), axis=(-2, -1)) + 1e-14)
    np.testing.assert_array_equal(relax_A(A, np.zeros(20)), A)


def test_energy_final_examples(rng):
    g = GridSpec(6, 5, 0.2, 0.3)
    E2 = 1 + rng.random(g.cell_shape)
    z = np.zeros(g.vertex_shape + (3,))
    s = rng.standard_normal(g.cell_shape + (3, 3))
    out = update_energy_final(E2, np.full(g.vertex_shape, 2.0), z, s, s, z, 0.1, g)
    np.testing.assert_array_equal(out, E2)
    v = rng.standard_normal(g.vertex_shape + (3,))
    out = update_energy_final(E2, 1 + rng.random(g.vertex_shape), v, s, s, v, 0.1, g)
    assert out.sum() == pytest.approx(E2.sum(), rel=1e-13)


def test_curl_diagnostics_examples(rng):
    g = GridSpec(6, 6, 0.5, 0.5, bc_x="transmissive", bc_y="transmissive")
    A = np.broadcast_to(EYE, g.cell_shape + (3, 3)).copy()
    J = np.zeros(g.cell_shape + (3,))
    rows, cj = curl_diagnostics(A, J, g)
    assert not rows.any() and cj == 0.0
    X, Y = g.cell_centers()
    A[..., 0, :] = np.stack([-Y, X, np.zeros_like(X)], axis=-1)
    rows, _ = curl_diagnostics(A, J, g)
    # the interior value is 2; the copied ghost ring keeps boundary values below that
    assert rows[0] == pytest.approx(2.0)
    g = GridSpec(6, 6, 0.5, 0.5)
    A = _gradient_rows(rng, g, 3)
    rows, _ = curl_diagnostics(A, np.zeros(g.cell_shape + (3,)), g)
    assert rows.max() <= 1e-13


def test_transport_is_consistent_with_advection():
    """A uniform translation of a smooth row field moves it with the flow."""
    g = GridSpec(32, 4, 1 / 32, 0.25)
    X, _ = g.cell_centers()
    A = np.broadcast_to(EYE, g.cell_shape + (3, 3)).copy()
    A[..., 0, 0] = 1 + 0.1 * np.sin(2 * np.pi * X)
    v = np.broadcast_to([0.5, 0.0, 0.0], g.vertex_shape + (3,))
    out = transport_A(A, v, 1e-3, g)
    exact = 1 + 0.1 * np.sin(2 * np.pi * (X - 0.5e-3))
    assert np.abs(out[..., 0, 0] - exact).max() < 1e-5
    # entries that were uniform stay untouched
    np.testing.assert_allclose(out[..., 1:, 1:], A[..., 1:, 1:], atol=1e-15)
