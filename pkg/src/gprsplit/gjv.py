"""Semi-implicit stage for the coupled deviatoric metric, thermal impulse and velocity.

The G-deviator and the thermal impulse are written as explicit functions of the
unknown vertex velocity.  Substituting them into the momentum equation gives a
vector wave equation ``rho v - dt^2 d_k(H_iknm d_n v_m) = b`` on the vertices.
"""

from typing import NamedTuple

import numpy as np

from .grid import diff_cp, diff_pc
from .krylov import LinearOperator, SolverConfig, solve_auto, symmetry_defect
from .model import det3, deviator, inv3, metric_of, vertex_density

_EYE = np.eye(3)


class GJVResult(NamedTuple):
    v: np.ndarray           # v** at vertices
    mom: np.ndarray         # (rho v)** at vertices
    Gdev: np.ndarray        # G0** on cells
    J: np.ndarray           # J*** on cells
    sigma: np.ndarray
    omega: np.ndarray
    iterations: int = 0


def relaxation_kappa(rho, A, dt, params):
    """kappa = 2 dt rho cs^2 / theta1 = 6 dt |A|^(5/3) / tau1, zero without shear waves."""
    if params.cs == 0.0:
        return np.zeros(np.shape(rho))
    d = det3(A)
    return 6.0 * dt * np.abs(d) ** (5.0 / 3.0) / params.tau1


def sigma_inverse(G, rho, theta1, dt, params):
    """Sigma^-1 with Sigma = I + (2 dt rho cs^2 / theta1) G.

    A non-finite or infinite ``theta1`` is the elastic limit, Sigma = I.
    """
    G = np.asarray(G, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = 2.0 * dt * np.asarray(rho) * params.cs**2 / theta1
    kappa = np.where(np.isfinite(kappa), kappa, 0.0)
    return inv3(_EYE + kappa[..., None, None] * G)


def strain_tensor_C(G, Sinv, rho, params):
    """C_iknm = rho cs^2 G_il Sinv_al (G_am d_kn + G_mk d_an - 2/3 d_ak G_nm)."""
    P = (np.asarray(rho) * params.cs**2)[..., None, None] * (G @ Sinv)
    PG = P @ G
    C = np.einsum("...im,kn->...iknm", PG, _EYE)
    C += np.einsum("...in,...mk->...iknm", P, G)
    C -= (2.0 / 3.0) * np.einsum("...ik,...nm->...iknm", P, G)
    return C


def build_H(G, Sinv, J, rho, dt, tau2, params):
    """H = C + tau2 rho ch^2/(dt + tau2) d_kn J_i J_m, per cell."""
    H = strain_tensor_C(G, Sinv, rho, params)
    if params.ch > 0.0:
        c = np.asarray(rho) * params.ch**2 * tau2 / (dt + tau2)
        JJ = c[..., None, None] * (J[..., :, None] * J[..., None, :])
        H += np.einsum("...im,kn->...iknm", JJ, _EYE)
    return H


def vertex_divergence(F, grid):
    """d^pc_k F_{..k} of a cell field, contracted over the last axis."""
    ddx, ddy = diff_pc(F[..., :2], grid)
    return ddx[..., 0] + ddy[..., 1]


def velocity_gradient(v, grid):
    """L_mk = d^cp_k v_m on cells (third column zero)."""
    ddx, ddy = diff_cp(v, grid)
    return np.stack([ddx, ddy, np.zeros_like(ddx)], axis=-1)


def build_rhs_b(mom_s, G, Sinv, Gdev_s, Gdev_n, J2, rho_n, kappa, dt, params, grid):
    """Known right-hand side of the velocity system, on vertices.

    ``mom_s`` is rho* v* after the transport stage, ``J2`` the thermal impulse
    after the heat stage and ``kappa`` the relaxation factor of Sigma.
    """
    rho_n = np.asarray(rho_n, dtype=float)
    b = np.array(mom_s, dtype=float)
    if params.cs > 0.0:
        P = (rho_n * params.cs**2)[..., None, None] * (G @ Sinv)
        trace_n = np.einsum("...ij,...ij->...", G, Gdev_n)
        # linearised trace part of the relaxation source, frozen at time n
        stress = P @ (Gdev_s + (kappa * trace_n / 3.0)[..., None, None] * _EYE)
        b -= dt * vertex_divergence(stress, grid)
    if params.ch > 0.0:
        c = dt * rho_n * params.ch**2 / (1.0 + dt / params.tau2)
        b -= vertex_divergence(c[..., None, None] * (J2[..., :, None] * J2[..., None, :]), grid)
    return b


def apply_v_operator(v, rho_p, H, dt, grid):
    """rho* v - dt^2 d^pc_k(H_iknm d^cp_n v_m)."""
    Lv = velocity_gradient(v, grid)
    flux = np.einsum("...iknm,...mn->...ik", H, Lv)
    return rho_p[..., None] * v - dt * dt * vertex_divergence(flux, grid)


def velocity_operator(rho_p, H, dt, grid):
    """Linear operator on the free (non-Dirichlet) vertex velocities."""
    shape = grid.vertex_shape + (3,)
    if not grid.has_dirichlet:
        return LinearOperator(lambda v: apply_v_operator(v, rho_p, H, dt, grid), shape, "velocity")
    free = ~grid.dirichlet_mask

    def apply(v):
        w = v * free[..., None]
        out = apply_v_operator(w, rho_p, H, dt, grid)
        out[~free] = rho_p[~free][:, None] * v[~free]
        return out

    return LinearOperator(apply, shape, "velocity")


def solve_velocity(b, rho_p, H, dt, grid, cfg=SolverConfig(), x0=None):
    """Solve the vector wave equation; Dirichlet vertices keep the wall velocity.

    Returns ``(v, iterations)``.
    """
    if not np.any(H):
        v = b / rho_p[..., None]
        if grid.has_dirichlet:
            v[grid.dirichlet_mask] = grid.dirichlet_velocity[grid.dirichlet_mask]
        return v, 0
    rhs = np.array(b, dtype=float)
    vD = np.zeros_like(rhs)
    if grid.has_dirichlet:
        mask = grid.dirichlet_mask
        vD[mask] = grid.dirichlet_velocity[mask]
        rhs -= apply_v_operator(vD, rho_p, H, dt, grid)
        rhs[mask] = 0.0
    L = velocity_operator(rho_p, H, dt, grid)
    if cfg.max_iter is None:
        cfg = cfg._replace(max_iter=20 * (grid.nx + grid.ny) + 200)
    guess = None
    if x0 is not None:
        guess = np.array(x0, dtype=float)
        if grid.has_dirichlet:
            guess[grid.dirichlet_mask] = 0.0
    symmetric = symmetry_defect(L, n_probes=2) <= 1e-12
    res = solve_auto(L, rhs, guess, cfg, symmetric=symmetric)
    return res.x + vD, res.iterations


def post_updates(v, G, Gdev_n, Gdev_s, Sinv, J2, rho_n, kappa, dt, tau2, params, grid):
    """G0**, J***, sigma**, omega*** from the new vertex velocity.

    The result for G0 is projected onto its trace-free part: the linearised
    relaxation only keeps the trace to O(kappa dt).
    """
    Lv = velocity_gradient(v, grid)
    GL = G @ Lv
    S = GL + np.swapaxes(GL, -1, -2)
    S -= (2.0 / 3.0) * np.trace(GL, axis1=-2, axis2=-1)[..., None, None] * _EYE
    trace_n = np.einsum("...ij,...ij->...", G, Gdev_n)
    Gdev = Sinv @ (Gdev_s - dt * S) + (kappa * trace_n / 3.0)[..., None, None] * Sinv
    Gdev = deviator(Gdev)
    J3 = (J2 - dt * np.einsum("...m,...mk->...k", J2, Lv)) / (1.0 + dt / tau2)
    rho_n = np.asarray(rho_n, dtype=float)
    sigma = (rho_n * params.cs**2)[..., None, None] * (G @ Gdev)
    omega = (rho_n * params.ch**2)[..., None, None] * (J2[..., :, None] * J3[..., None, :])
    return Gdev, J3, sigma, omega


def gjv_step(qs, J2, A_n, rho_n, dt, params, grid, cfg=SolverConfig()):
    """Whole stage: from the transported state and heat-stage J** to v**, (rho v)**, ...

    Parameters
    ----------
    qs : ConservedState
        State after the transport stage (its J is ignored in favour of ``J2``).
    A_n, rho_n : arrays
        Distortion and density at the start of the step; they freeze the
        coefficients of the linear system.
    """
    G = metric_of(A_n)
    Gdev_n = deviator(G)
    Gdev_s = deviator(metric_of(qs.A))
    kappa = relaxation_kappa(rho_n, A_n, dt, params)
    Sinv = inv3(_EYE + kappa[..., None, None] * G)
    rho_p = vertex_density(qs.rho, grid)
    b = build_rhs_b(qs.mom, G, Sinv, Gdev_s, Gdev_n, J2, rho_n, kappa, dt, params, grid)
    if params.cs == 0.0 and params.ch == 0.0:
        H = np.zeros(grid.cell_shape + (3, 3, 3, 3))
    else:
        H = build_H(G, Sinv, J2, rho_n, dt, params.tau2, params)
    v, iters = solve_velocity(b, rho_p, H, dt, grid, cfg, x0=qs.mom / rho_p[..., None])
    # momentum in flux form so that its total does not depend on the solver residual
    mom = b + dt * dt * vertex_divergence(
        np.einsum("...iknm,...mn->...ik", H, velocity_gradient(v, grid)), grid)
    if grid.has_dirichlet:
        mask = grid.dirichlet_mask
        mom[mask] = rho_p[mask][:, None] * v[mask]
    Gdev, J3, sigma, omega = post_updates(v, G, Gdev_n, Gdev_s, Sinv, J2, rho_n, kappa,
                                          dt, params.tau2, params, grid)
    return GJVResult(v, mom, Gdev, J3, sigma, omega, iters)
