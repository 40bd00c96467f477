"""Time stepping of the four-stage split scheme, benchmark cases and run orchestration."""

import logging
import math
import os
import time
from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np

from . import io as gio
from .compatible import curl_diagnostics, final_stresses, update_A, update_energy_final, update_J
from .convective import TimeStepPolicy, compute_dt, convective_step
from .exceptions import ConfigurationError, GPRError, SubsystemError, TimeStepFailure
from .gjv import gjv_step, relaxation_kappa
from .grid import Boundary, GridSpec, avg_c2p, curl_pc, div_cp, vertex_weights
from .heat import solve_temperature
from .krylov import SolverConfig
from .model import (ConservedState, ModelParams, mach_numbers, state_from_primitives, temperature,
                    vertex_density)
from .pressure import extract_p_star, solve_pressure

log = logging.getLogger(__name__)


@dataclass
class StepInfo:
    dt: float
    iterations: dict = field(default_factory=dict)
    retries: int = 0


def _stage(name, step, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except TimeStepFailure:
        raise
    except GPRError as exc:
        raise SubsystemError(name, step, exc) from exc


def advance_step(state, grid, params, dt, cfg=SolverConfig(), det_rescale=True):
    """One step of the split scheme with a given ``dt``.

    Stage order: transport, heat, G-J-v wave, pressure wave, then the
    compatible updates of A, J and E.  Returns ``(new_state, StepInfo)``.
    Raises :class:`TimeStepFailure` (transport positivity) untouched, every
    other failure wrapped in :class:`SubsystemError`.
    """
    n = state.step
    rho_n, A_n, J_n = state.rho, state.A, state.J
    T_n = _stage("temperature-extraction", n, temperature, state, grid, params)

    qs = _stage("convective", n, convective_step, state, dt, grid, params)
    heat = _stage("heat", n, solve_temperature, qs, dt, grid, params, T_n, cfg)
    gjv = _stage("gjv", n, gjv_step, qs, heat.J, A_n, rho_n, dt, params, grid, cfg)
    p2 = _stage("pressure-extraction", n, extract_p_star, heat.E, qs.rho, gjv.v, gjv.Gdev,
                gjv.J, params, grid)
    pres = _stage("pressure", n, solve_pressure, p2, qs.rho, gjv.mom, dt, params, grid, cfg)

    rho_new = qs.rho
    mom_new = pres.mom
    v_new = mom_new / vertex_density(rho_new, grid)[..., None]
    kappa = relaxation_kappa(rho_n, A_n, dt, params)
    A_new = _stage("compatible-A", n, update_A, A_n, v_new, rho_new, kappa, dt, grid, params,
                   det_rescale)
    T_vertex = avg_c2p(heat.T, grid) if params.ch > 0.0 else None
    J_new = update_J(J_n, v_new, dt, params.tau2, grid, T_vertex)
    sigma, omega = final_stresses(rho_new, A_new, J_new, params)
    E_new = update_energy_final(heat.E, pres.h_vertex, mom_new, sigma, omega, v_new, dt, grid)
    new = ConservedState(rho_new, mom_new, E_new, A_new, J_new, state.t + dt, n + 1)
    info = StepInfo(dt, {"heat": heat.iterations, "gjv": gjv.iterations,
                         "pressure": pres.iterations})
    return new, info


def step_with_retry(state, grid, params, dt, cfg=SolverConfig(), det_rescale=True, max_retries=5):
    """Advance one step, halving ``dt`` when the transport stage loses positivity."""
    for attempt in range(max_retries + 1):
        try:
            new, info = advance_step(state, grid, params, dt, cfg, det_rescale)
            info.retries = attempt
            return new, info
        except TimeStepFailure as exc:
            log.warning("step %d: %s; halving dt", state.step, exc)
            dt *= 0.5
    raise SubsystemError("convective", state.step, "density stayed negative after retries")


# -- diagnostics ---------------------------------------------------------------------------


def totals(state, grid):
    """Integrals of mass, momentum (x, y) and energy."""
    w = vertex_weights(grid)
    mom = np.einsum("ij,ijk->k", w, state.mom)
    return {"mass": float(np.sum(state.rho) * grid.volume),
            "mom_x": float(mom[0]), "mom_y": float(mom[1]),
            "energy": float(np.sum(state.E) * grid.volume)}


def diagnostics_row(state, grid):
    rows, cj = curl_diagnostics(state.A, state.J, grid)
    row = {"t": state.t, "curlA_inf": float(rows.max()), "curlJ_inf": cj}
    row.update(totals(state, grid))
    return row


def velocity_divergence(state, grid):
    v = state.mom / vertex_density(state.rho, grid)[..., None]
    return div_cp(v, grid)


# -- cases ------------------------------------------------------------------------------------


@dataclass
class CaseSpec:
    """Everything needed to run one benchmark.

    ``init(grid, params, **ic)`` builds the initial state; ``ic`` holds the
    case-specific initial-data parameters that a config file may override.
    """

    name: str
    bounds: tuple
    nx: int
    ny: int
    params: ModelParams
    init: Callable
    bc_x: object = "periodic"
    bc_y: object = "periodic"
    t_end: float = 1.0
    cfl: float = 0.45
    dt_max: float = None
    dt_fixed: float = None
    v_ref: float = None
    output_interval: float = None
    det_rescale: bool = True
    rel_tol: float = 1e-10
    deterministic: bool = False
    cut_axis: str = "x"
    ic: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.t_end > 0:
            raise ConfigurationError("t_end must be positive")
        if self.nx < 2 or self.ny < 2:
            raise ConfigurationError("grid needs at least 2x2 cells")

    def grid(self):
        x0, x1, y0, y1 = self.bounds
        return GridSpec.from_bounds(x0, x1, y0, y1, self.nx, self.ny, bc_x=self.bc_x,
                                    bc_y=self.bc_y)

    def initial_state(self, grid=None):
        grid = grid or self.grid()
        return self.init(grid, self.params, **self.ic)

    def policy(self):
        """CFL policy; ``v_ref`` caps dt at CFL min(dx, dy) / v_ref, which also covers a fluid at rest."""
        dt_max = self.dt_max
        if self.v_ref:
            g = self.grid()
            cap = self.cfl * min(g.dx, g.dy) / self.v_ref
            dt_max = cap if dt_max is None else min(dt_max, cap)
        return TimeStepPolicy(self.cfl, dt_max=dt_max)

    def solver_config(self):
        return SolverConfig(self.rel_tol, None, self.deterministic).validated()


def tau1_from_mu(mu, params):
    """Relaxation time giving the shear viscosity ``mu`` in the stiff limit."""
    return 6.0 * mu / (params.rho0 * params.cs**2)


def _tg_init(grid, params, p0=1e5):
    X, Y = grid.cell_centers()
    psi = np.sin(X) * np.sin(Y)
    # vertex velocity as the discrete curl of a stream function: exactly solenoidal
    v = curl_pc(np.stack([np.zeros_like(psi), np.zeros_like(psi), psi], axis=-1), grid)
    p = p0 + 0.25 * (np.cos(2 * X) + np.cos(2 * Y))
    return state_from_primitives(grid, params, params.rho0, v, p)


def _riemann_init(grid, params, rho_l, u_l, v_l, p_l, rho_r, u_r, v_r, p_r, x0=0.0):
    Xc, _ = grid.cell_centers()
    Xv, _ = grid.vertices()
    left_c = Xc < x0
    rho = np.where(left_c, rho_l, rho_r)
    p = np.where(left_c, p_l, p_r)
    vel = np.zeros(grid.vertex_shape + (3,))
    # dual-cell average: a vertex on the interface gets the mean of both sides
    wl = np.where(Xv < x0, 1.0, np.where(Xv > x0, 0.0, 0.5))
    vel[..., 0] = wl * u_l + (1 - wl) * u_r
    vel[..., 1] = wl * v_l + (1 - wl) * v_r
    return state_from_primitives(grid, params, rho, vel, p)


def _shear_init(grid, params, v0=0.1, p=1e5, rho=1.0):
    Xv, _ = grid.vertices()
    vel = np.zeros(grid.vertex_shape + (3,))
    vel[..., 1] = v0 * np.sign(Xv)
    return state_from_primitives(grid, params, rho, vel, p)


def _cavity_init(grid, params, p=1e8, rho=1.0):
    return state_from_primitives(grid, params, rho, np.zeros(3), p)


def _rotor_init(grid, params, R=0.2, p=1e5, rho=1.0):
    X, Y = grid.vertices()
    inside = np.hypot(X, Y) <= R
    vel = np.zeros(grid.vertex_shape + (3,))
    vel[..., 0] = np.where(inside, -Y / R, 0.0)
    vel[..., 1] = np.where(inside, X / R, 0.0)
    return state_from_primitives(grid, params, rho, vel, p)


def _explosion_init(grid, params, R=0.5, rho_in=1.0, p_in=1.0, rho_out=0.125, p_out=0.1):
    X, Y = grid.cell_centers()
    inside = np.hypot(X, Y) <= R
    return state_from_primitives(grid, params, np.where(inside, rho_in, rho_out), np.zeros(3),
                                 np.where(inside, p_in, p_out))


_TG_PARAMS = ModelParams(gamma=1.4, cv=1004.0 / 1.4, cs=1000.0, ch=100.0, rho0=1.0,
                         tau1=1e-8, tau2=1e-10)
_RP_STATES = {
    "rp1": (1.0, 0.0, 0.0, 1.0, 0.125, 0.0, 0.0, 0.1),
    "rp2": (0.445, 0.698, 0.0, 3.528, 0.5, 0.0, 0.0, 0.571),
    "rp3": (1.0, 0.0, -0.2, 1.0, 0.5, 0.0, 0.2, 0.5),
    "rp4": (1.0, 0.0, -0.2, 1.0, 0.5, 0.0, 0.2, 0.5),
}
_RP_SETUP = {   # cs, ch, tau1, tau2, t_end, nx
    "rp1": (100.0, 10.0, 1e-10, 1e-12, 0.2, 1000),
    "rp2": (100.0, 10.0, 1e-10, 1e-12, 0.14, 1000),
    "rp3": (1.0, 1.0, 1e20, 1e20, 0.2, 2000),
    "rp4": (1.0, 1.0, 1e-10, 1e-12, 0.2, 1000),
}


def taylor_green_case(p0=1e5, nx=200, t_end=1.0):
    return CaseSpec("taylor_green", (0.0, 2 * np.pi, 0.0, 2 * np.pi), nx, nx, _TG_PARAMS,
                    _tg_init, t_end=t_end, ic={"p0": p0})


def riemann_case(name="rp1"):
    cs, ch, tau1, tau2, t_end, nx = _RP_SETUP[name]
    s = _RP_STATES[name]
    params = ModelParams(gamma=1.4, cv=1.0, cs=cs, ch=ch, rho0=1.0, tau1=tau1, tau2=tau2)
    keys = ("rho_l", "u_l", "v_l", "p_l", "rho_r", "u_r", "v_r", "p_r")
    return CaseSpec(name, (-0.5, 0.5, -0.5, 0.5), nx, 10, params, _riemann_init,
                    bc_x="transmissive", bc_y="periodic", t_end=t_end, v_ref=1.0,
                    ic=dict(zip(keys, s)))


def shear_case(mu=1e-2, solid=False):
    params = ModelParams(gamma=1.4, cv=1.0, cs=1e3, ch=1e2, rho0=1.0, tau1=1e20, tau2=1e-12)
    if not solid:
        params = params.replace(tau1=tau1_from_mu(mu, params))
    return CaseSpec("shear_solid" if solid else "shear_fluid", (-1.0, 1.0, -1.0, 1.0), 1000, 10,
                    params, _shear_init, bc_x="transmissive", bc_y="periodic",
                    t_end=5e-4 if solid else 0.25, dt_fixed=1e-5 if solid else 5e-3,
                    ic={"v0": 0.1})


def cavity_case(nx=200, mu=1e-2):
    params = ModelParams(gamma=1.4, cv=1e5, cs=1e3, ch=100.0, rho0=1.0, tau1=1.0, tau2=1e-14)
    params = params.replace(tau1=tau1_from_mu(mu, params))
    lid = Boundary("moving-wall", (1.0, 0.0, 0.0))
    return CaseSpec("cavity", (0.0, 1.0, 0.0, 1.0), nx, nx, params, _cavity_init,
                    bc_x="wall", bc_y=("wall", lid), t_end=10.0, dt_max=1e-2, ic={"p": 1e8})


def rotor_case(nx=512):
    params = ModelParams(gamma=1.4, cv=1004.0 / 1.4, cs=1.0, ch=100.0, rho0=1.0,
                         tau1=1e20, tau2=1e-14)
    return CaseSpec("rotor", (-1.0, 1.0, -1.0, 1.0), nx, nx, params, _rotor_init, t_end=0.3,
                    ic={"R": 0.2, "p": 1e5})


def explosion_case(solid=False, nx=500):
    params = ModelParams(gamma=1.4, cv=2.5, cs=1.0, ch=1.0, rho0=1.0, tau1=1e-8, tau2=1e-10)
    if solid:
        params = params.replace(tau1=1e20, tau2=1e20)
    return CaseSpec("ep2" if solid else "ep1", (-1.0, 1.0, -1.0, 1.0), nx, nx, params,
                    _explosion_init, bc_x="transmissive", bc_y="transmissive",
                    t_end=0.15 if solid else 0.2, dt_max=1e-3, ic={"R": 0.5})


CASES = {
    "taylor_green": taylor_green_case,
    "rp1": lambda: riemann_case("rp1"),
    "rp2": lambda: riemann_case("rp2"),
    "rp3": lambda: riemann_case("rp3"),
    "rp4": lambda: riemann_case("rp4"),
    "shear_fluid": shear_case,
    "shear_solid": lambda: shear_case(solid=True),
    "cavity": cavity_case,
    "rotor": rotor_case,
    "ep1": explosion_case,
    "ep2": lambda: explosion_case(solid=True),
}


def get_case(name):
    try:
        return CASES[name]()
    except KeyError:
        raise ConfigurationError(f"unknown case {name!r}; known: {', '.join(CASES)}") from None


_SPEC_KEYS = {"nx": int, "ny": int, "t_end": float, "cfl": float, "dt_max": float,
              "dt_fixed": float, "v_ref": float, "output_interval": float, "det_rescale": gio.parse_bool,
              "rel_tol": float, "deterministic": gio.parse_bool}
_PARAM_KEYS = {f.name for f in fields(ModelParams)}


def apply_overrides(spec, overrides):
    """Return a copy of ``spec`` with ``key = value`` overrides applied.

    Keys are CaseSpec fields, ModelParams fields, ``mu`` (sets tau1) or
    initial-data parameters of the case.  Anything else is an error.
    """
    spec = replace(spec, ic=dict(spec.ic))
    pchanges = {}
    mu = None
    for key, raw in overrides.items():
        if key in _SPEC_KEYS:
            setattr(spec, key, _SPEC_KEYS[key](raw) if isinstance(raw, str) else raw)
        elif key in _PARAM_KEYS:
            pchanges[key] = float(raw)
        elif key == "mu":
            mu = float(raw)
        elif key in spec.ic:
            spec.ic[key] = float(raw)
        else:
            raise ConfigurationError(f"unknown configuration key {key!r} for case {spec.name}")
    if pchanges:
        spec.params = spec.params.replace(**pchanges)
    if mu is not None:
        spec.params = spec.params.replace(tau1=tau1_from_mu(mu, spec.params))
    spec.__post_init__()
    return spec


# -- runs -------------------------------------------------------------------------------------


@dataclass
class RunReport:
    case: str
    times: list = field(default_factory=list)            # output times
    snapshots: list = field(default_factory=list)        # ConservedState copies
    diagnostics: list = field(default_factory=list)      # one dict per step
    iterations: list = field(default_factory=list)       # one dict per step
    dts: list = field(default_factory=list)
    wall_time: float = 0.0
    final: ConservedState = None
    grid: GridSpec = None


def run(spec, state=None, grid=None, callback=None, keep_snapshots=True, out_dir=None):
    """Integrate ``spec`` to ``t_end``.

    ``callback(state, grid, info)`` is called after every step.  Snapshots are
    taken at multiples of ``output_interval`` (and at the end).
    """
    grid = grid or spec.grid()
    state = state if state is not None else spec.initial_state(grid)
    params, cfg, policy = spec.params, spec.solver_config(), spec.policy()
    report = RunReport(spec.name, grid=grid)
    report.diagnostics.append(diagnostics_row(state, grid))
    next_out = spec.output_interval if spec.output_interval else math.inf

    def snapshot(s):
        report.times.append(s.t)
        if keep_snapshots:
            report.snapshots.append(s.copy())
        if out_dir:
            gio.write_vtk(os.path.join(out_dir, f"{spec.name}_{len(report.times) - 1:04d}.vtk"),
                          grid, s, params)

    snapshot(state)
    t0 = time.perf_counter()
    while state.t < spec.t_end * (1 - 1e-12):
        dt = spec.dt_fixed if spec.dt_fixed else compute_dt(state, grid, policy)
        dt = min(dt, spec.t_end - state.t, next_out - state.t)
        state, info = step_with_retry(state, grid, params, dt, cfg, spec.det_rescale)
        report.dts.append(info.dt)
        report.iterations.append(info.iterations)
        report.diagnostics.append(diagnostics_row(state, grid))
        if callback:
            callback(state, grid, info)
        if state.t >= next_out * (1 - 1e-12):
            snapshot(state)
            next_out += spec.output_interval
    if not report.times or report.times[-1] < state.t:
        snapshot(state)
    report.wall_time = time.perf_counter() - t0
    report.final = state
    return report


def run_case(spec, out_dir):
    """Run a case and write VTK snapshots, a 1D cut and the diagnostics table."""
    os.makedirs(out_dir, exist_ok=True)
    report = run(spec, keep_snapshots=False, out_dir=out_dir)
    gio.write_cut_csv(os.path.join(out_dir, f"{spec.name}_cut.csv"), report.grid, report.final,
                      spec.params, axis=spec.cut_axis)
    gio.write_diagnostics_csv(os.path.join(out_dir, f"{spec.name}_diagnostics.csv"),
                              report.diagnostics)
    return report


def mach_table_row(state, grid, params, p0):
    """Errors of one Taylor-Green run against the incompressible limit."""
    err = state.rho - params.rho0
    ma = float(np.max(mach_numbers(np.array([1.0, 0.0, 0.0]), params.rho0, p0,
                                   p0 / ((params.gamma - 1) * params.rho0 * params.cv),
                                   params)[0]))
    return {"p0": p0, "Ma": ma, "L2_rho": float(np.sqrt(np.mean(err**2))),
            "Linf_rho": float(np.max(np.abs(err))),
            "Linf_divv": float(np.max(np.abs(velocity_divergence(state, grid))))}


def convergence_harness(p0_values, nx=128, t_end=0.1, cfl=0.45, out_csv=None, base=None):
    """Taylor-Green Mach sweep on a fixed mesh with one common time step.

    Returns a list of rows with errors and observed orders in Ma (None for
    the first row and wherever an error is exactly zero).
    """
    rows = []
    dt = None
    for p0 in p0_values:
        spec = base(p0) if base else taylor_green_case(p0=p0, nx=nx, t_end=t_end)
        spec.cfl = cfl
        grid = spec.grid()
        state0 = spec.initial_state(grid)
        if dt is None:
            # the convective CFL bound does not depend on p0
            dt = compute_dt(state0, grid, spec.policy())
            nsteps = max(1, int(math.ceil(spec.t_end / dt - 1e-9)))
            dt = spec.t_end / nsteps
        spec.dt_fixed = dt
        rep = run(spec, state=state0, grid=grid, keep_snapshots=False)
        rows.append(mach_table_row(rep.final, grid, spec.params, p0))
    for prev, row in zip([None] + rows[:-1], rows):
        for key in ("L2_rho", "Linf_rho", "Linf_divv"):
            if prev is None or not (prev[key] > 0 and row[key] > 0):
                # an exact zero (e.g. a discretely div-free field) has no order
                row["order_" + key] = None
            else:
                row["order_" + key] = (math.log(prev[key] / row[key])
                                       / math.log(prev["Ma"] / row["Ma"]))
    if out_csv:
        gio.write_table_csv(out_csv, rows)
    return rows

