import math

import numpy as np
import pytest

from gprsplit.exceptions import DomainError
from gprsplit.reference import (euler_exact_riemann, ghia_centerlines, radial_explosion_reference,
                                star_state, stokes_first_problem, taylor_green_exact)

SOD_L, SOD_R = (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)


def test_equal_states_constant():
    xi = np.linspace(-2, 2, 41)
    r, u, p = euler_exact_riemann((0.5, 0.3, 2.0), (0.5, 0.3, 2.0), 1.4, xi)
    np.testing.assert_allclose(r, 0.5)
    np.testing.assert_allclose(u, 0.3)
    np.testing.assert_allclose(p, 2.0)


def test_sod_star_state():
    ps, us = star_state(SOD_L, SOD_R, 1.4)
    assert ps == pytest.approx(0.30313, abs=1e-5)
    assert us == pytest.approx(0.92745, abs=1e-5)


def _shock_jump_residual(rho_pre, u_pre, p_pre, rho_post, u_post, p_post, S, gamma):
    """Rankine-Hugoniot mismatch of mass, momentum and energy fluxes in the shock frame."""
    def flux(r, u, p):
        E = p / (gamma - 1) + 0.5 * r * u * u
        return np.array([r * u, r * u * u + p, u * (E + p)]), np.array([r, r * u, E])
    f1, q1 = flux(rho_pre, u_pre, p_pre)
    f2, q2 = flux(rho_post, u_post, p_post)
    return np.abs((f2 - f1) - S * (q2 - q1)).max()


def test_sod_shock_satisfies_rankine_hugoniot():
    gamma = 1.4
    ps, us = star_state(SOD_L, SOD_R, gamma)
    # right shock speed from the sampled solution: last xi where density differs from 0.125
    xi = np.linspace(1.70, 1.80, 200001)
    r, _, _ = euler_exact_riemann(SOD_L, SOD_R, gamma, xi)
    S = xi[np.nonzero(r > 0.125 + 1e-12)[0][-1]]
    rs, _, _ = euler_exact_riemann(SOD_L, SOD_R, gamma, us + 1e-9)
    assert _shock_jump_residual(0.125, 0.0, 0.1, rs, us, ps, S, gamma) < 1e-5


def test_pressure_function_residual():
    gamma = 1.4
    ps, us = star_state(SOD_L, SOD_R, gamma)
    # left rarefaction + right shock continuity, written out independently
    al = math.sqrt(gamma * 1.0 / 1.0)
    fl = 2 * al / (gamma - 1) * ((ps / 1.0) ** ((gamma - 1) / (2 * gamma)) - 1)
    A, B = 2 / ((gamma + 1) * 0.125), (gamma - 1) / (gamma + 1) * 0.1
    fr = (ps - 0.1) * math.sqrt(A / (ps + B))
    assert abs(fl + fr) < 1e-10
    assert abs(us - 0.5 * (fr - fl)) < 1e-12


def test_rarefaction_invariant():
    gamma = 1.4
    xi = np.linspace(-1.15, -0.08, 50)
    r, u, p = euler_exact_riemann(SOD_L, SOD_R, gamma, xi)
    a = np.sqrt(gamma * p / r)
    np.testing.assert_allclose(u + 2 * a / (gamma - 1), 2 * math.sqrt(gamma) / (gamma - 1), rtol=1e-12)
    np.testing.assert_allclose(p / r**gamma, 1.0, rtol=1e-12)


def test_scalar_sampling_and_vacuum():
    out = euler_exact_riemann(SOD_L, SOD_R, 1.4, 0.0)
    assert all(isinstance(x, float) for x in out)
    with pytest.raises(DomainError):
        star_state((1.0, -20.0, 1.0), (1.0, 20.0, 1.0))


def test_taylor_green_values():
    _, u, v, p = taylor_green_exact(np.pi / 2, 0.0, 0.0, 0.01, 1.0, 3.0)
    assert u == pytest.approx(1.0) and v == pytest.approx(0.0, abs=1e-15)
    _, _, _, p = taylor_green_exact(0.0, 0.0, 0.0, 0.01, 1.0, 3.0)
    assert p == pytest.approx(3.5)


def test_stokes_values():
    assert stokes_first_problem(0.0, 0.1, 0.01, 0.1) == 0.0
    assert stokes_first_problem(10.0, 0.1, 0.01, 0.1) == pytest.approx(0.1)
    x = 2 * math.sqrt(0.01 * 0.3)
    assert stokes_first_problem(x, 0.3, 0.01, 1.0) == pytest.approx(0.8427007929497149, rel=1e-14)
    with pytest.raises(DomainError):
        stokes_first_problem(0.1, 0.0, 0.01, 1.0)


def test_radial_uniform_state_stays_constant():
    r, rho, u, p = radial_explosion_reference((1.0, 0.0, 1.0), (1.0, 0.0, 1.0), n_cells=200,
                                              t_final=0.1)
    np.testing.assert_allclose(rho, 1.0, rtol=1e-12)
    np.testing.assert_allclose(u, 0.0, atol=1e-12)
    np.testing.assert_allclose(p, 1.0, rtol=1e-12)


def test_radial_short_time_keeps_discontinuity():
    r, rho, _, p = radial_explosion_reference((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), n_cells=300,
                                              t_final=1e-4)
    assert np.all(rho[r < 0.45] == pytest.approx(1.0))
    assert np.all(rho[r > 0.55] == pytest.approx(0.125))


def test_radial_explosion_profile_shape():
    r, rho, u, p = radial_explosion_reference((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), n_cells=600)
    assert np.all(rho > 0) and np.all(p > 0)
    assert u.max() > 0.5                         # outward flow
    assert np.abs(u[r < 0.05]).max() < 0.05      # symmetry at the origin
    # the cylindrical shock lags its planar counterpart (0.5 + 1.75 * 0.2) but is well past R
    front = r[np.nonzero(rho > 0.126)[0][-1]]
    assert 0.75 < front < 0.86


def test_ghia_fixture():
    d = ghia_centerlines()
    assert len(d["y"]) == 17
    assert d["u"][d["y"] == 1.0][0] == 1.0
    assert d["u"][d["y"] == 0.0][0] == 0.0
    assert d["v"][0] == 0.0 and d["v"][-1] == 0.0
