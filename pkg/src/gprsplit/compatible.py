"""Curl-compatible final updates of A and J, final energy and curl diagnostics."""

import numpy as np

from .exceptions import StateError
from .grid import avg_c2p, avg_p2c, curl_pc, diff_cp, diff_pc, div_cp
from .model import det3, metric_of, stresses


def _transport_rows(Q, v, grid):
    """Compatible transport increment of a row-wise field ``Q`` of shape (ny, nx, r, 3).

    Returns d_k^cp(v_m Q^p_im) + avg_p2c(v_m (d_m^pc Q_ik - d_k^pc Q_im)).  The
    second term vanishes wherever the rows of Q have zero discrete curl.
    """
    Qp = avg_c2p(Q, grid)
    w = np.einsum("...im,...m->...i", Qp, v)
    gx, gy = diff_cp(w, grid)
    first = np.stack([gx, gy, np.zeros_like(gx)], axis=-1)

    dx, dy = diff_pc(Q, grid)
    adv = v[..., 0, None, None] * dx + v[..., 1, None, None] * dy
    # v_m d_k Q_im for k = x, y; no z derivative in 2D
    tx = np.einsum("...im,...m->...i", dx, v)
    ty = np.einsum("...im,...m->...i", dy, v)
    cross = np.stack([tx, ty, np.zeros_like(tx)], axis=-1)
    return first + avg_p2c(adv - cross, grid)


def transport_A(A, v, dt, grid):
    return A - dt * _transport_rows(A, v, grid)


def transport_J(J, v, dt, grid):
    return J - dt * _transport_rows(J[..., None, :], v, grid)[..., 0, :]


def relax_A(A, kappa):
    """Semi-implicit strain relaxation of the distortion, per cell.

    With G = A^T A = V diag(g) V^T the eigenvalues are pulled towards their
    mean gm by the factor (1 + kappa gm)/(1 + kappa g), applied to G through
    A -> A V diag(h) V^T with h = sqrt of that factor.  Only the increment
    A V diag(h - 1) V^T is added, so nothing changes where kappa is negligible.
    """
    kappa = np.asarray(kappa, dtype=float)
    if not np.any(kappa > 0.0):
        return A
    g, V = np.linalg.eigh(metric_of(A))
    gm = g.mean(axis=-1, keepdims=True)
    h = np.sqrt((1.0 + kappa[..., None] * gm) / (1.0 + kappa[..., None] * g))
    return A + (A @ V) @ ((h - 1.0)[..., :, None] * np.swapaxes(V, -1, -2))


def rescale_det(A, rho, rho0):
    """Scale every cell so that det A = rho / rho0 exactly."""
    d = det3(A)
    if np.any(d <= 0.0):
        raise StateError("det(A) <= 0 after transport (inverted element)")
    s = np.cbrt(np.asarray(rho) / (rho0 * d))
    return A * s[..., None, None]


def update_A(A_n, v_new, rho_new, kappa, dt, grid, params, rescale=True):
    """A^{n+1}: compatible transport, strain relaxation, optional det rescale."""
    A = transport_A(A_n, v_new, dt, grid)
    if np.any(det3(A) <= 0.0):
        raise StateError("det(A) <= 0 after transport (inverted element)")
    A = relax_A(A, kappa)
    if rescale:
        A = rescale_det(A, rho_new, params.rho0)
    return A


def update_J(J_n, v_new, dt, tau2, grid, T_vertex=None):
    """J^{n+1}: compatible transport, optional temperature-gradient source, relaxation.

    ``T_vertex`` (the heat-stage temperature averaged to vertices) adds the
    term -dt grad_cp T, whose discrete curl vanishes identically.
    """
    J = transport_J(J_n, v_new, dt, grid)
    if T_vertex is not None:
        gx, gy = diff_cp(T_vertex, grid)
        J = J - dt * np.stack([gx, gy, np.zeros_like(gx)], axis=-1)
    return J / (1.0 + dt / tau2)


def update_energy_final(E2, h_vertex, mom_new, sigma, omega, v_new, dt, grid):
    """E^{n+1} = E** - dt div_cp(h (rho v) + (sigma + omega)^p v).

    ``sigma`` and ``omega`` are cell tensors; they are averaged to vertices.
    """
    S = avg_c2p(sigma + omega, grid)
    flux = h_vertex[..., None] * mom_new + np.einsum("...ik,...i->...k", S, v_new)
    return E2 - dt * div_cp(flux, grid)


def final_stresses(rho, A, J, params):
    return stresses(rho, metric_of(A), J, params)


def curl_diagnostics(A, J, grid):
    """L-infinity norm of curl_pc of each row of A and of J.

    Returns ``(rows, j)`` with ``rows`` an array of three values.
    """
    rows = np.array([np.max(np.abs(curl_pc(A[..., i, :], grid))) for i in range(3)])
    return rows, float(np.max(np.abs(curl_pc(J, grid))))
