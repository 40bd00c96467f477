"""Implicit temperature / thermal-impulse stage.

The vertex thermal impulse is eliminated, which leaves a scalar Helmholtz-type
equation for the cell temperature.  That system is solved with CG, and J and
E are then updated explicitly.
"""

from typing import NamedTuple

import numpy as np

from .grid import avg_c2p, diff_cp, div_cp, grad_pc
from .krylov import LinearOperator, SolverConfig, solve_auto
from .model import ConservedState, cell_velocity, energy_extract_T, metric_of, vertex_density

HeatSolveConfig = SolverConfig


class HeatResult(NamedTuple):
    T: np.ndarray          # T** on cells
    J: np.ndarray          # J** on cells
    E: np.ndarray          # E** on cells
    J_vertex: np.ndarray   # J**,p
    iterations: int = 0


def helmholtz_coefficient(T_n, params):
    """m = cv / (T^n ch^2)."""
    return params.cv / (np.asarray(T_n) * params.ch**2)


def apply_T_operator(T, m, dt, tau2, grid):
    """(1 + dt/tau2) m T - dt^2 div_cp(grad_pc T)."""
    lap = div_cp(grad_pc(T, grid), grid)
    return (1.0 + dt / tau2) * m * T - dt * dt * lap


def temperature_operator(m, dt, tau2, grid):
    return LinearOperator(lambda T: apply_T_operator(T, m, dt, tau2, grid),
                          grid.cell_shape, "temperature")


def _default_iters(grid):
    return 10 * (grid.nx + grid.ny) + 100


def solve_temperature(qs, dt, grid, params, T_n=None, cfg=HeatSolveConfig()):
    """Heat stage: returns T**, J**, E** (and the vertex J**).

    Parameters
    ----------
    qs : ConservedState
        State after the transport stage.
    T_n : array, optional
        Temperature at the beginning of the step, used in the frozen
        coefficient m.  Defaults to T*.
    """
    v = cell_velocity(qs, grid)
    T_s = energy_extract_T(qs.E, qs.rho, v, metric_of(qs.A), qs.J, params)
    if params.ch == 0.0:
        return HeatResult(T_s, qs.J.copy(), qs.E.copy(), avg_c2p(qs.J, grid), 0)
    if T_n is None:
        T_n = T_s
    tau2 = params.tau2
    m = helmholtz_coefficient(T_n, params)
    J_sp = avg_c2p(qs.J, grid)
    rhs = (1.0 + dt / tau2) * m * T_s - dt * div_cp(J_sp, grid)
    L = temperature_operator(m, dt, tau2, grid)
    if cfg.max_iter is None:
        cfg = cfg._replace(max_iter=_default_iters(grid))
    res = solve_auto(L, rhs, T_s, cfg, symmetric=True)
    T2 = res.x

    relax = 1.0 / (1.0 + dt / tau2)
    J2p = relax * (J_sp - dt * grad_pc(T2, grid))
    T2p = avg_c2p(T2, grid)
    gx, gy = diff_cp(T2p, grid)
    gradT = np.stack([gx, gy, np.zeros_like(gx)], axis=-1)
    J2c = relax * (qs.J - dt * gradT)
    q = (vertex_density(qs.rho, grid) * params.ch**2 * T2p)[..., None] * J2p
    E2 = qs.E - dt * div_cp(q, grid)
    return HeatResult(T2, J2c, E2, J2p, res.iterations)


def apply_heat(qs, heat):
    """Copy of ``qs`` with J and E replaced by the heat-stage values."""
    return ConservedState(qs.rho, qs.mom, heat.E, qs.A, heat.J, qs.t, qs.step)
