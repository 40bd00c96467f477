"""Plain-text input and output: config files, VTK snapshots and CSV tables."""

import csv
import os

import numpy as np

from .exceptions import ConfigurationError
from .model import cell_velocity, eos_pressure, temperature

CUT_COLUMNS = ("x", "rho", "u", "v", "p", "T", "A11", "A21", "J1")
DIAG_COLUMNS = ("t", "curlA_inf", "curlJ_inf", "mass", "mom_x", "mom_y", "energy")


def parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment.  Values stay strings."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key or not value:
                raise ConfigurationError(f"{path}:{lineno}: empty key or value")
            if key in out:
                raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def primitive_fields(state, grid, params):
    """Cell fields rho, u, v, p, T."""
    v = cell_velocity(state, grid)
    T = temperature(state, grid, params)
    return {"rho": state.rho, "u": v[..., 0], "v": v[..., 1],
            "p": eos_pressure(state.rho, T, params), "T": T}


def write_vtk(path, grid, state, params):
    """Legacy ASCII structured-grid VTK with cell data."""
    ny, nx = grid.cell_shape
    x = grid.origin[0] + np.arange(nx + 1) * grid.dx
    y = grid.origin[1] + np.arange(ny + 1) * grid.dy
    f = primitive_fields(state, grid, params)
    for i in range(3):
        for k in range(3):
            f[f"A{i + 1}{k + 1}"] = state.A[..., i, k]
    for i in range(3):
        f[f"J{i + 1}"] = state.J[..., i]
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"gprsplit t={state.t:.9g}\nASCII\nDATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {nx + 1} {ny + 1} 1\nPOINTS {(nx + 1) * (ny + 1)} double\n")
        X, Y = np.meshgrid(x, y)
        pts = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
        np.savetxt(fh, pts, fmt="%.10g")
        fh.write(f"CELL_DATA {nx * ny}\n")
        for name, arr in f.items():
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            np.savetxt(fh, np.asarray(arr).ravel(), fmt="%.12g")


def cut_rows(grid, state, params, axis="x", index=None):
    """Rows of a 1D cut through the cell centres (middle row / column by default)."""
    f = primitive_fields(state, grid, params)
    X, Y = grid.cell_centers()
    if axis == "x":
        j = grid.ny // 2 if index is None else index
        sl = (j, slice(None))
        coord = X[sl]
    elif axis == "y":
        i = grid.nx // 2 if index is None else index
        sl = (slice(None), i)
        coord = Y[sl]
    else:
        raise ConfigurationError(f"cut axis must be 'x' or 'y', got {axis!r}")
    cols = [coord, f["rho"][sl], f["u"][sl], f["v"][sl], f["p"][sl], f["T"][sl],
            state.A[sl][..., 0, 0], state.A[sl][..., 1, 0], state.J[sl][..., 0]]
    return np.column_stack(cols)


def write_cut_csv(path, grid, state, params, axis="x", index=None):
    data = cut_rows(grid, state, params, axis, index)
    np.savetxt(path, data, delimiter=",", header=",".join(CUT_COLUMNS), comments="", fmt="%.12g")


def write_diagnostics_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAG_COLUMNS)
        for r in rows:
            w.writerow([f"{r[c]:.16g}" for c in DIAG_COLUMNS])


def write_table_csv(path, rows):
    if not rows:
        raise ValueError("empty table")
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})
