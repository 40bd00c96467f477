"""Implicit pressure stage.

Eliminating the vertex momentum from the energy equation gives a symmetric
positive definite wave equation for the cell pressure.  The momentum update
then follows from the new pressure gradient.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import StateError
from .grid import avg_c2p, avg_p2c, div_cp, grad_pc
from .krylov import LinearOperator, SolverConfig, solve_auto


class PressureResult(NamedTuple):
    p: np.ndarray          # p^{n+1} on cells
    mom: np.ndarray        # (rho v)^{n+1} on vertices
    h_vertex: np.ndarray   # enthalpy h** at vertices (reused by the energy update)
    iterations: int = 0


def extract_p_star(E, rho, v_vertex, Gdev, J, params, grid):
    """p** = (gamma - 1)(E** - kinetic - elastic - thermal-impulse energy).

    The velocity is averaged from the vertices to the cells first.
    """
    v = avg_p2c(v_vertex, grid)
    e1 = (E - 0.5 * rho * np.sum(v * v, axis=-1)
          - 0.25 * rho * params.cs**2 * np.einsum("...ij,...ij->...", Gdev, Gdev)
          - 0.5 * params.ch**2 * rho * np.sum(J * J, axis=-1))
    if np.any(e1 <= 0.0):
        raise StateError(f"non-positive internal energy before pressure solve (min {e1.min():.3e})")
    return (params.gamma - 1.0) * e1


def enthalpy_vertex(p, rho, params, grid):
    """h = gamma p / ((gamma - 1) rho) on cells, averaged to the vertices."""
    return avg_c2p(params.gamma * p / ((params.gamma - 1.0) * rho), grid)


def _masked(h, grid):
    if grid.has_dirichlet:
        h = np.where(grid.dirichlet_mask, 0.0, h)
    return h


def apply_p_operator(p, h_vertex, dt, gamma, grid):
    """p/(gamma-1) - dt^2 div_cp(h grad_pc p); h is zero at Dirichlet vertices."""
    h = _masked(h_vertex, grid)
    return p / (gamma - 1.0) - dt * dt * div_cp(h[..., None] * grad_pc(p, grid), grid)


def pressure_operator(h_vertex, dt, gamma, grid):
    return LinearOperator(lambda p: apply_p_operator(p, h_vertex, dt, gamma, grid),
                          grid.cell_shape, "pressure")


def solve_pressure(p2, rho_s, mom2, dt, params, grid, cfg=SolverConfig()):
    """Pressure wave equation, then (rho v)^{n+1} = (rho v)** - dt grad_pc p^{n+1}.

    Momentum at Dirichlet vertices is left untouched.
    """
    gamma = params.gamma
    hv = enthalpy_vertex(p2, rho_s, params, grid)
    rhs = p2 / (gamma - 1.0) - dt * div_cp(hv[..., None] * mom2, grid)
    L = pressure_operator(hv, dt, gamma, grid)
    if cfg.max_iter is None:
        cfg = cfg._replace(max_iter=20 * (grid.nx + grid.ny) + 200)
    res = solve_auto(L, rhs, p2, cfg, symmetric=True)
    p_new = res.x
    corr = grad_pc(p_new, grid)
    if grid.has_dirichlet:
        corr[grid.dirichlet_mask] = 0.0
    return PressureResult(p_new, mom2 - dt * corr, hv, res.iterations)
