"""Closure relations of the GPR model with an ideal-gas internal energy.

All pointwise functions broadcast over leading axes: scalars have shape ``S``,
vectors ``S + (3,)`` and tensors ``S + (3, 3)``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigurationError, DomainError, StateError
from .grid import avg_c2p, avg_p2c


@dataclass(frozen=True)
class ModelParams:
    """Material parameters.

    Attributes
    ----------
    gamma : float
        Adiabatic exponent, > 1.
    cv : float
        Specific heat at constant volume.
    cs : float
        Shear sound speed.
    ch : float
        Heat wave speed coefficient.
    rho0 : float
        Reference density of the unstrained medium.
    tau1, tau2 : float
        Strain and thermal relaxation times.
    """

    gamma: float = 1.4
    cv: float = 2.5
    cs: float = 1.0
    ch: float = 1.0
    rho0: float = 1.0
    tau1: float = 1e20
    tau2: float = 1e20

    def __post_init__(self):
        checks = {
            "gamma > 1": self.gamma > 1.0,
            "cv > 0": self.cv > 0.0,
            "cs >= 0": self.cs >= 0.0,
            "ch >= 0": self.ch >= 0.0,
            "rho0 > 0": self.rho0 > 0.0,
            "tau1 > 0": self.tau1 > 0.0,
            "tau2 > 0": self.tau2 > 0.0,
        }
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise ConfigurationError("invalid model parameters: " + ", ".join(bad))

    @property
    def mu(self):
        """Shear viscosity of the stiff relaxation limit."""
        return self.rho0 * self.cs**2 * self.tau1 / 6.0

    def conductivity(self, rho, T):
        """Heat conductivity of the stiff relaxation limit."""
        return np.asarray(rho) * np.asarray(T) * self.ch**2 * self.tau2

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass
class ConservedState:
    """Discrete state: rho, E, A, J on cells, momentum on vertices."""

    rho: np.ndarray
    mom: np.ndarray
    E: np.ndarray
    A: np.ndarray
    J: np.ndarray
    t: float = 0.0
    step: int = 0
    extras: dict = field(default_factory=dict, repr=False)

    def copy(self):
        return ConservedState(self.rho.copy(), self.mom.copy(), self.E.copy(),
                              self.A.copy(), self.J.copy(), self.t, self.step,
                              dict(self.extras))

    def check(self, grid):
        grid.check_cell(self.rho, "rho")
        grid.check_vertex(self.mom, "mom")
        grid.check_cell(self.E, "E")
        grid.check_cell(self.A, "A")
        grid.check_cell(self.J, "J")
        for name in ("rho", "mom", "E", "A", "J"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise StateError(f"non-finite entries in {name}")
        if np.any(self.rho <= 0.0):
            raise StateError("density must be positive")
        return self


# -- elementary tensor algebra ------------------------------------------------------

def det3(M):
    return (M[..., 0, 0] * (M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 1])
            - M[..., 0, 1] * (M[..., 1, 0] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 0])
            + M[..., 0, 2] * (M[..., 1, 0] * M[..., 2, 1] - M[..., 1, 1] * M[..., 2, 0]))


def inv3(M):
    """Closed-form inverse of 3x3 matrices via the adjugate."""
    M = np.asarray(M, dtype=float)
    adj = np.empty_like(M)
    adj[..., 0, 0] = M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 1]
    adj[..., 0, 1] = M[..., 0, 2] * M[..., 2, 1] - M[..., 0, 1] * M[..., 2, 2]
    adj[..., 0, 2] = M[..., 0, 1] * M[..., 1, 2] - M[..., 0, 2] * M[..., 1, 1]
    adj[..., 1, 0] = M[..., 1, 2] * M[..., 2, 0] - M[..., 1, 0] * M[..., 2, 2]
    adj[..., 1, 1] = M[..., 0, 0] * M[..., 2, 2] - M[..., 0, 2] * M[..., 2, 0]
    adj[..., 1, 2] = M[..., 0, 2] * M[..., 1, 0] - M[..., 0, 0] * M[..., 1, 2]
    adj[..., 2, 0] = M[..., 1, 0] * M[..., 2, 1] - M[..., 1, 1] * M[..., 2, 0]
    adj[..., 2, 1] = M[..., 0, 1] * M[..., 2, 0] - M[..., 0, 0] * M[..., 2, 1]
    adj[..., 2, 2] = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    det = M[..., 0, 0] * adj[..., 0, 0] + M[..., 0, 1] * adj[..., 1, 0] + M[..., 0, 2] * adj[..., 2, 0]
    return adj / det[..., None, None]


def metric_of(A):
    """G = A^T A."""
    A = np.asarray(A, dtype=float)
    return np.einsum("...ji,...jk->...ik", A, A)


def deviator(G):
    """Trace-free part G - tr(G)/3 I."""
    G = np.asarray(G, dtype=float)
    tr = np.trace(G, axis1=-2, axis2=-1)
    return G - (tr / 3.0)[..., None, None] * np.eye(3)


def _ddot(a, b):
    return np.einsum("...ij,...ij->...", a, b)


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


# -- thermodynamics -------------------------------------------------------------------

def eos_pressure(rho, T, params):
    """Ideal gas p = (gamma - 1) rho cv T."""
    rho, T = np.asarray(rho, dtype=float), np.asarray(T, dtype=float)
    if np.any(rho <= 0.0) or np.any(T <= 0.0):
        raise DomainError("eos needs rho > 0 and T > 0")
    return (params.gamma - 1.0) * rho * params.cv * T


def eos_temperature(rho, p, params):
    """Inverse of :func:`eos_pressure`."""
    rho, p = np.asarray(rho, dtype=float), np.asarray(p, dtype=float)
    if np.any(rho <= 0.0) or np.any(p <= 0.0):
        raise DomainError("eos needs rho > 0 and p > 0")
    return p / ((params.gamma - 1.0) * rho * params.cv)


def kinetic_energy(rho, v):
    return 0.5 * rho * _dot(v, v)


def elastic_energy(rho, G, params):
    Gd = deviator(G)
    return 0.25 * rho * params.cs**2 * _ddot(Gd, Gd)


def thermal_impulse_energy(rho, J, params):
    return 0.5 * params.ch**2 * rho * _dot(J, J)


def mechanical_energy(rho, v, G, J, params):
    """Kinetic + elastic + thermal-impulse contributions to the total energy."""
    return (kinetic_energy(rho, v) + elastic_energy(rho, G, params)
            + thermal_impulse_energy(rho, J, params))


def energy_compose(rho, v, G, J, T, params):
    """Total energy density rho cv T + 1/2 rho|v|^2 + 1/4 rho cs^2 G0:G0 + 1/2 ch^2 rho |J|^2."""
    rho = np.asarray(rho, dtype=float)
    return rho * params.cv * np.asarray(T, dtype=float) + mechanical_energy(rho, v, G, J, params)


def energy_extract_T(E, rho, v, G, J, params):
    """Temperature from the total energy; raises StateError on a non-positive remainder."""
    rho = np.asarray(rho, dtype=float)
    e1 = np.asarray(E, dtype=float) - mechanical_energy(rho, v, G, J, params)
    if np.any(e1 <= 0.0):
        raise StateError(f"negative internal energy (min {np.min(e1):.3e})")
    return e1 / (rho * params.cv)


def entropy(rho, p, params):
    """Specific entropy cv ln(p / rho^gamma), additive constant fixed to zero."""
    return params.cv * np.log(np.asarray(p) / np.asarray(rho) ** params.gamma)


def stresses(rho, G, J, params):
    """Shear stress rho cs^2 G G0 and thermal stress rho ch^2 J (x) J."""
    rho = np.asarray(rho, dtype=float)
    G = np.asarray(G, dtype=float)
    J = np.asarray(J, dtype=float)
    sigma = (rho * params.cs**2)[..., None, None] * (G @ deviator(G))
    omega = (rho * params.ch**2)[..., None, None] * (J[..., :, None] * J[..., None, :])
    return sigma, omega


def heat_flux(rho, T, J, params):
    """q = rho ch^2 T J."""
    return (np.asarray(rho) * params.ch**2 * np.asarray(T))[..., None] * np.asarray(J)


def thetas(rho, A, params):
    """Relaxation functions (theta1, theta2).

    theta1 = rho tau1 cs^2 |A|^(-5/3) / 3 and theta2 = rho ch^2 tau2.
    """
    rho = np.asarray(rho, dtype=float)
    d = det3(np.asarray(A, dtype=float))
    if np.any(d <= 0.0):
        raise StateError("distortion with non-positive determinant (inverted element)")
    theta1 = rho * params.tau1 * params.cs**2 * d ** (-5.0 / 3.0) / 3.0
    theta2 = rho * params.ch**2 * params.tau2 * np.ones_like(d)
    return theta1, theta2


def mach_numbers(v, rho, p, T, params):
    """Acoustic, shear and heat Mach numbers.

    A vanishing shear or heat speed gives ``inf`` (``nan`` if |v| is zero too).
    """
    rho, p, T = (np.asarray(a, dtype=float) for a in (rho, p, T))
    if np.any(rho <= 0) or np.any(p <= 0) or np.any(T <= 0):
        raise DomainError("Mach numbers need rho, p, T > 0")
    speed = np.sqrt(_dot(np.asarray(v, dtype=float), np.asarray(v, dtype=float)))
    ma = speed / np.sqrt(params.gamma * p / rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        ms = speed / params.cs if params.cs > 0 else np.where(speed > 0, np.inf, 0.0)
        ch_t = params.ch * np.sqrt(T / params.cv)
        mh = np.where(ch_t > 0, speed / np.where(ch_t > 0, ch_t, 1.0),
                      np.where(speed > 0, np.inf, 0.0))
    return ma, ms, mh


def entropy_production(rho, A, J, T, params):
    """Local entropy production alpha:alpha/(T theta1) + beta.beta/(T theta2)."""
    G = metric_of(A)
    alpha = (np.asarray(rho) * params.cs**2)[..., None, None] * (np.asarray(A) @ deviator(G))
    beta = (np.asarray(rho) * params.ch**2)[..., None] * np.asarray(J)
    theta1, theta2 = thetas(rho, A, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        prod = _ddot(alpha, alpha) / (T * theta1)
        if params.ch > 0:
            prod = prod + _dot(beta, beta) / (T * theta2)
    return np.nan_to_num(prod)


# -- grid-aware state helpers ----------------------------------------------------------

def vertex_density(rho, grid):
    return avg_c2p(rho, grid)


def vertex_velocity(state, grid):
    return state.mom / vertex_density(state.rho, grid)[..., None]


def cell_velocity(state, grid):
    """Cell velocity: vertex velocities averaged to the cell centre."""
    return avg_p2c(vertex_velocity(state, grid), grid)


def temperature(state, grid, params):
    return energy_extract_T(state.E, state.rho, cell_velocity(state, grid),
                            metric_of(state.A), state.J, params)


def pressure(state, grid, params):
    return eos_pressure(state.rho, temperature(state, grid, params), params)


def state_from_primitives(grid, params, rho, v_vertex, p, A=None, J=None, t=0.0):
    """Assemble a conserved state from cell (rho, p, A, J) and vertex velocity."""
    rho = grid.check_cell(np.broadcast_to(np.asarray(rho, dtype=float), grid.cell_shape).copy())
    p = grid.check_cell(np.broadcast_to(np.asarray(p, dtype=float), grid.cell_shape).copy())
    v_vertex = grid.check_vertex(np.broadcast_to(np.asarray(v_vertex, dtype=float),
                                                 grid.vertex_shape + (3,)).copy())
    if grid.has_dirichlet:
        v_vertex[grid.dirichlet_mask] = grid.dirichlet_velocity[grid.dirichlet_mask]
    if A is None:
        A = np.broadcast_to(np.eye(3), grid.cell_shape + (3, 3)).copy()
    if J is None:
        J = np.zeros(grid.cell_shape + (3,))
    A = grid.check_cell(A, "A")
    J = grid.check_cell(J, "J")
    mom = vertex_density(rho, grid)[..., None] * v_vertex
    T = eos_temperature(rho, p, params)
    v_cell = avg_p2c(v_vertex, grid)
    E = energy_compose(rho, v_cell, metric_of(A), J, T, params)
    return ConservedState(rho, mom, E, A, J, t=t).check(grid)
