"""Reference solutions: exact Euler Riemann solver, incompressible flows, a radial
MUSCL-Hancock solver and tabulated cavity data."""

import csv
from importlib import resources

import numpy as np
from scipy.special import erf

from .exceptions import DomainError

# -- exact Riemann solver (ideal gas) ----------------------------------------------------


def _pressure_function(p, rho, pk, ak, gamma):
    """Toro's f_K(p) and its derivative for one side."""
    if p > pk:
        A = 2.0 / ((gamma + 1.0) * rho)
        B = (gamma - 1.0) / (gamma + 1.0) * pk
        s = np.sqrt(A / (p + B))
        return (p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (p + B))
    r = (p / pk) ** ((gamma - 1.0) / (2.0 * gamma))
    f = 2.0 * ak / (gamma - 1.0) * (r - 1.0)
    return f, 1.0 / (rho * ak) * (p / pk) ** (-(gamma + 1.0) / (2.0 * gamma))


def star_state(left, right, gamma=1.4, tol=1e-14, max_iter=100):
    """Pressure and velocity in the star region.

    Newton iteration on f_L(p) + f_R(p) + u_R - u_L = 0, started from the
    two-rarefaction guess.
    """
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    if min(rl, rr, pl, pr) <= 0.0:
        raise DomainError("Riemann data need positive density and pressure")
    al, ar = np.sqrt(gamma * pl / rl), np.sqrt(gamma * pr / rr)
    if 2.0 / (gamma - 1.0) * (al + ar) <= ur - ul:
        raise DomainError("initial data generate vacuum")
    z = (gamma - 1.0) / (2.0 * gamma)
    p = ((al + ar - 0.5 * (gamma - 1.0) * (ur - ul)) / (al / pl**z + ar / pr**z)) ** (1.0 / z)
    p = max(p, 1e-12)
    for _ in range(max_iter):
        fl, dl = _pressure_function(p, rl, pl, al, gamma)
        fr, dr = _pressure_function(p, rr, pr, ar, gamma)
        dp = (fl + fr + ur - ul) / (dl + dr)
        p_new = max(p - dp, 1e-3 * p)
        if abs(p_new - p) <= tol * 0.5 * (p_new + p):
            p = p_new
            break
        p = p_new
    fl, _ = _pressure_function(p, rl, pl, al, gamma)
    fr, _ = _pressure_function(p, rr, pr, ar, gamma)
    return p, 0.5 * (ul + ur) + 0.5 * (fr - fl)


def euler_exact_riemann(left, right, gamma, x_over_t):
    """Sample the exact solution of the Euler Riemann problem at xi = x/t.

    Parameters
    ----------
    left, right : (rho, u, p)
    x_over_t : float or array

    Returns
    -------
    (rho, u, p) arrays shaped like ``x_over_t``.
    """
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    ps, us = star_state(left, right, gamma)
    xi = np.atleast_1d(np.asarray(x_over_t, dtype=float))
    rho, u, p = np.empty_like(xi), np.empty_like(xi), np.empty_like(xi)
    g1 = (gamma - 1.0) / (gamma + 1.0)

    def side(xi_s, r, uk, pk, sign):
        # sign = -1 for the left wave family, +1 for the right one
        a = np.sqrt(gamma * pk / r)
        if ps > pk:   # shock
            rs = r * (ps / pk + g1) / (g1 * ps / pk + 1.0)
            S = uk + sign * a * np.sqrt((gamma + 1.0) / (2.0 * gamma) * ps / pk
                                        + (gamma - 1.0) / (2.0 * gamma))
            out = sign * (xi_s - S) > 0
            return (np.where(out, r, rs), np.where(out, uk, us), np.where(out, pk, ps))
        rs = r * (ps / pk) ** (1.0 / gamma)
        a_s = a * (ps / pk) ** ((gamma - 1.0) / (2.0 * gamma))
        head, tail = uk + sign * a, us + sign * a_s
        # inside the fan
        uf = 2.0 / (gamma + 1.0) * (-sign * a + 0.5 * (gamma - 1.0) * uk + xi_s)
        c = 2.0 / (gamma + 1.0) - sign * g1 / a * (uk - xi_s)
        c = np.clip(c, 0.0, None)
        rf = r * c ** (2.0 / (gamma - 1.0))
        pf = pk * c ** (2.0 * gamma / (gamma - 1.0))
        outside = sign * (xi_s - head) > 0
        star = sign * (xi_s - tail) < 0
        rr_ = np.where(outside, r, np.where(star, rs, rf))
        uu_ = np.where(outside, uk, np.where(star, us, uf))
        pp_ = np.where(outside, pk, np.where(star, ps, pf))
        return rr_, uu_, pp_

    lm = xi <= us
    if np.any(lm):
        rho[lm], u[lm], p[lm] = side(xi[lm], rl, ul, pl, -1.0)
    if np.any(~lm):
        rho[~lm], u[~lm], p[~lm] = side(xi[~lm], rr, ur, pr, +1.0)
    if np.ndim(x_over_t) == 0:
        return float(rho[0]), float(u[0]), float(p[0])
    return rho, u, p


# -- incompressible solutions ------------------------------------------------------------


def taylor_green_exact(x, y, t, nu, rho0=1.0, p0=0.0):
    """Decaying Taylor-Green vortex on [0, 2 pi]^2."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    f = np.exp(-2.0 * nu * t)
    u = np.sin(x) * np.cos(y) * f
    v = -np.cos(x) * np.sin(y) * f
    p = p0 + 0.25 * rho0 * (np.cos(2 * x) + np.cos(2 * y)) * f * f
    return np.full(np.broadcast(x, y).shape, rho0), u, v, p


def stokes_first_problem(x, t, nu, v0):
    """Tangential velocity v0 erf(x / (2 sqrt(nu t))) of an impulsively sheared layer."""
    if t <= 0.0:
        raise DomainError("Stokes solution needs t > 0")
    if nu <= 0.0:
        raise DomainError("Stokes solution needs nu > 0")
    return v0 * erf(np.asarray(x, dtype=float) / (2.0 * np.sqrt(nu * t)))


# -- radial (cylindrical) Euler reference ------------------------------------------------


def _prim_to_cons(W, gamma):
    r, u, p = W
    return np.array([r, r * u, p / (gamma - 1.0) + 0.5 * r * u * u])


def _cons_to_prim(U, gamma):
    r = U[0]
    u = U[1] / r
    return np.array([r, u, (gamma - 1.0) * (U[2] - 0.5 * r * u * u)])


def _flux(U, gamma):
    r, u, p = _cons_to_prim(U, gamma)
    return np.array([r * u, r * u * u + p, u * (U[2] + p)])


def _hllc(UL, UR, gamma):
    rl, ul, pl = _cons_to_prim(UL, gamma)
    rr, ur, pr = _cons_to_prim(UR, gamma)
    al, ar = np.sqrt(gamma * pl / rl), np.sqrt(gamma * pr / rr)
    SL = np.minimum(ul - al, ur - ar)
    SR = np.maximum(ul + al, ur + ar)
    Sm = (pr - pl + rl * ul * (SL - ul) - rr * ur * (SR - ur)) / (rl * (SL - ul) - rr * (SR - ur))
    FL, FR = _flux(UL, gamma), _flux(UR, gamma)

    def star(U, r, u, p, S):
        c = r * (S - u) / (S - Sm)
        return c * np.array([np.ones_like(r), Sm,
                             U[2] / r + (Sm - u) * (Sm + p / (r * (S - u)))])

    UsL, UsR = star(UL, rl, ul, pl, SL), star(UR, rr, ur, pr, SR)
    F = np.where(SL >= 0, FL, np.where(Sm >= 0, FL + SL * (UsL - UL),
                                       np.where(SR > 0, FR + SR * (UsR - UR), FR)))
    return F


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def radial_explosion_reference(inner, outer, R=0.5, gamma=1.4, t_final=0.2, n_cells=2000,
                               r_max=1.5, cfl=0.8):
    """Cylindrically symmetric explosion via second-order MUSCL-Hancock.

    The solver advances r-weighted conserved variables; the only geometric
    source is the pressure term in the radial momentum equation.  Total
    r-weighted mass is therefore conserved up to the outer boundary flux.

    Returns
    -------
    r, rho, u, p : arrays of cell-centre values.
    """
    r_f = np.linspace(0.0, r_max, n_cells + 1)
    dr = r_f[1] - r_f[0]
    r_c = 0.5 * (r_f[:-1] + r_f[1:])
    vol = 0.5 * (r_f[1:] ** 2 - r_f[:-1] ** 2)
    W = np.where(r_c <= R, np.array(inner, dtype=float)[:, None],
                 np.array(outer, dtype=float)[:, None])
    U = _prim_to_cons(W, gamma)
    t = 0.0
    while t < t_final - 1e-14:
        Wp = _cons_to_prim(U, gamma)
        a = np.sqrt(gamma * Wp[2] / Wp[0])
        dt = min(cfl * dr / np.max(np.abs(Wp[1]) + a), t_final - t)
        U = _muscl_hancock_step(U, dt, dr, r_f, r_c, vol, gamma)
        t += dt
    Wp = _cons_to_prim(U, gamma)
    return r_c, Wp[0], Wp[1], Wp[2]


def _muscl_hancock_step(U, dt, dr, r_f, r_c, vol, gamma):
    # ghost cells: reflective at r = 0, transmissive outside
    Ug = np.concatenate([U[:, :1] * np.array([[1.0], [-1.0], [1.0]]), U, U[:, -1:]], axis=1)
    W = _cons_to_prim(Ug, gamma)
    slope = np.zeros_like(W)
    slope[:, 1:-1] = _minmod(W[:, 1:-1] - W[:, :-2], W[:, 2:] - W[:, 1:-1])
    WL, WR = W - 0.5 * slope, W + 0.5 * slope
    UL, UR = _prim_to_cons(WL, gamma), _prim_to_cons(WR, gamma)
    # half-step predictor with the Cartesian flux difference and the geometric source
    dU = 0.5 * dt / dr * (_flux(UL, gamma) - _flux(UR, gamma))
    rc = np.concatenate([[-r_c[0]], r_c, [r_c[-1] + dr]])
    u, p = W[1], W[2]
    geo = -np.array([Ug[1], Ug[1] * u, u * (Ug[2] + p)]) / rc
    dU = dU + 0.5 * dt * geo
    UL, UR = UL + dU, UR + dU
    F = _hllc(UR[:, :-1], UL[:, 1:], gamma)          # at faces 0 .. n
    rF = F * r_f
    Unew = U - dt / vol * (rF[:, 1:] - rF[:, :-1])
    Wn = _cons_to_prim(U, gamma)
    Unew[1] += dt / vol * Wn[2] * (r_f[1:] - r_f[:-1])
    return Unew


# -- cavity data ---------------------------------------------------------------------------


def ghia_centerlines():
    """Re = 100 centreline velocities of the lid-driven cavity.

    Returns
    -------
    dict with arrays ``y``, ``u`` (vertical centreline) and ``x``, ``v``
    (horizontal centreline).
    """
    text = resources.files("gprsplit").joinpath("data/ghia_re100.csv").read_text()
    rows = [r for r in csv.reader(line for line in text.splitlines()
                                  if line.strip() and not line.startswith("#"))]
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, i] for i, name in enumerate(header)}
