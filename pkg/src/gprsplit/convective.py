"""Explicit transport stage with vertex-based Rusanov fluxes.

Only material waves are handled here, so the admissible time step depends on
the flow speed alone.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, TimeStepFailure
from .grid import avg_c2p, avg_p2c, diff_cp
from .model import ConservedState, cell_velocity, mechanical_energy, metric_of, vertex_density


@dataclass(frozen=True)
class TimeStepPolicy:
    """CFL number in (0, 1/2] plus optional clamps on the step size."""

    cfl: float = 0.45
    dt_min: float = None
    dt_max: float = None

    def __post_init__(self):
        if not 0.0 < self.cfl <= 0.5:
            raise ConfigurationError(f"CFL must lie in (0, 0.5], got {self.cfl}")
        if self.dt_max is not None and self.dt_max <= 0:
            raise ConfigurationError("dt_max must be positive")
        if self.dt_min is not None and self.dt_min <= 0:
            raise ConfigurationError("dt_min must be positive")


def _corners(q):
    """SW, SE, NW, NE neighbours of every vertex of a ghost-padded cell array."""
    return q[:-1, :-1], q[:-1, 1:], q[1:, :-1], q[1:, 1:]


def vertex_max_speed(v_cell, grid):
    """s_max at every vertex: largest |v| over the adjacent cells."""
    speed = np.sqrt(np.sum(grid.pad_cells(v_cell, vector=True) ** 2, axis=-1))
    sw, se, nw, ne = _corners(speed)
    return grid.trim_vertices(np.maximum(np.maximum(sw, se), np.maximum(nw, ne)))


def compute_dt(state, grid, policy):
    """dt = CFL min_p h_p / s_max_p, falling back to ``dt_max`` for a fluid at rest."""
    smax = vertex_max_speed(cell_velocity(state, grid), grid)
    moving = smax > 0.0
    if np.any(moving):
        dt = policy.cfl * grid.h_vertex / float(np.max(smax[moving]))
    elif policy.dt_max is not None:
        dt = policy.dt_max
    else:
        raise ConfigurationError("fluid at rest and no dt_max given: cannot choose a time step")
    if policy.dt_max is not None:
        dt = min(dt, policy.dt_max)
    if policy.dt_min is not None:
        dt = max(dt, policy.dt_min)
    return dt


def nodal_flux(q, fx, fy, speed, grid):
    """Rusanov-type vertex flux from the four surrounding cells.

    Parameters
    ----------
    q, fx, fy : tuple of 4 arrays
        Conserved quantity and its x/y physical fluxes in the SW, SE, NW and NE
        cells around each vertex (any common shape).
    speed : tuple of 4 arrays
        |v| in the same four cells.

    Returns
    -------
    (gx, gy)
        ``avg(f_k) - 1/2 h s_max d_k q`` for k = x, y.
    """
    sw, se, nw, ne = q
    dqdx = (se + ne - sw - nw) / (2.0 * grid.dx)
    dqdy = (nw + ne - sw - se) / (2.0 * grid.dy)
    smax = np.maximum(np.maximum(speed[0], speed[1]), np.maximum(speed[2], speed[3]))
    visc = 0.5 * grid.h_vertex * smax
    extra = dqdx.ndim - smax.ndim
    visc = visc.reshape(visc.shape + (1,) * extra)
    gx = 0.25 * (fx[0] + fx[1] + fx[2] + fx[3]) - visc * dqdx
    gy = 0.25 * (fy[0] + fy[1] + fy[2] + fy[3]) - visc * dqdy
    return gx, gy


def _flux_divergence(q_pad, fx_pad, fy_pad, speed_pad, grid):
    gx, gy = nodal_flux(_corners(q_pad), _corners(fx_pad), _corners(fy_pad),
                        _corners(speed_pad), grid)
    ddx, _ = diff_cp(grid.trim_vertices(gx), grid)
    _, ddy = diff_cp(grid.trim_vertices(gy), grid)
    return ddx + ddy


def convective_step(state, dt, grid, params):
    """Advance the transport subsystem by ``dt`` and return the starred state.

    Density, momentum and the non-internal part of the energy are updated in
    flux form; A and J use the same nodal flux minus a discrete ``q div v``
    correction, which is the advective form.  Raises :class:`TimeStepFailure`
    if the density loses positivity.
    """
    rho, E, A, J = state.rho, state.E, state.A, state.J
    v = cell_velocity(state, grid)
    m = avg_p2c(state.mom, grid)
    e234 = mechanical_energy(rho, v, metric_of(A), J, params)

    P = grid.pad_cells
    v_p = P(v, vector=True)
    speed = np.sqrt(np.sum(v_p**2, axis=-1))
    vx, vy = v_p[..., 0], v_p[..., 1]
    rho_p, m_p, E_p, A_p, J_p = P(rho), P(m, vector=True), P(E), P(A), P(J)
    e_p = P(e234)

    def advance(q, q_p, fx_p, fy_p):
        return q - dt * _flux_divergence(q_p, fx_p, fy_p, speed, grid)

    rho_s = advance(rho, rho_p, rho_p * vx, rho_p * vy)
    if np.any(rho_s <= 0.0) or not np.all(np.isfinite(rho_s)):
        raise TimeStepFailure(f"negative density after convective step (dt={dt:.3e})")
    m_s = advance(m, m_p, m_p * vx[..., None], m_p * vy[..., None])
    E_s = advance(E, E_p, e_p * vx, e_p * vy)

    # discrete div v built from the same averaged velocity that enters the fluxes
    w = avg_c2p(v, grid, vector=True)
    wx, _ = diff_cp(w[..., 0], grid)
    _, wy = diff_cp(w[..., 1], grid)
    divv = wx + wy
    A_s = advance(A, A_p, A_p * vx[..., None, None], A_p * vy[..., None, None]) \
        + dt * A * divv[..., None, None]
    J_s = advance(J, J_p, J_p * vx[..., None], J_p * vy[..., None]) + dt * J * divv[..., None]

    mom_s = state.mom + avg_c2p(m_s - m, grid, vector=True)
    if grid.has_dirichlet:
        mask = grid.dirichlet_mask
        mom_s[mask] = (vertex_density(rho_s, grid)[..., None] * grid.dirichlet_velocity)[mask]
    return ConservedState(rho_s, mom_s, E_s, A_s, J_s, state.t, state.step)
