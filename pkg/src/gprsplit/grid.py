"""Vertex-staggered Cartesian mesh and its compatible difference operators.

Scalars, tensors and the thermal impulse live at cell centres, momentum lives
at the vertices of the primal grid.  Every operator is assembled from corner
normals ``n^{pc} = 1/2 (s_x dy, s_y dx)`` where ``(s_x, s_y)`` are the signs of
``x_c - x_p``; the cell-to-vertex operators (suffix ``_pc``) and the
vertex-to-cell operators (suffix ``_cp``) use the same four-point stencil,

    d/dx ~ (SE + NE - SW - NW) / (2 dx),   d/dy ~ (NW + NE - SW - SE) / (2 dy),

which makes ``curl(grad) = 0`` and ``div(curl) = 0`` hold exactly and makes
``div_cp`` the negative adjoint of ``grad_pc`` on periodic grids.

Storage is row-major over ``(iy, ix)`` followed by the component axes, so a cell
tensor field has shape ``(ny, nx, 3, 3)``.  Under non-periodic boundaries the
vertex arrays carry one extra row/column (boundary vertices); under periodic
boundaries the vertex ``ix = nx`` is identified with ``ix = 0`` and not stored.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, DimensionError

BOUNDARY_KINDS = ("periodic", "transmissive", "wall", "moving-wall")
_WALLS = ("wall", "moving-wall")


@dataclass(frozen=True)
class Boundary:
    """Closure of one side of the domain.

    ``velocity`` is only used by ``moving-wall`` and is imposed at the boundary
    vertices of that side.
    """

    kind: str = "periodic"
    velocity: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in BOUNDARY_KINDS:
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")
        if len(self.velocity) != 3:
            raise ConfigurationError("wall velocity must be a 3-vector")

    @property
    def is_wall(self):
        return self.kind in _WALLS


def _as_pair(bc):
    if isinstance(bc, (str, Boundary)):
        bc = (bc, bc)
    left, right = (b if isinstance(b, Boundary) else Boundary(b) for b in bc)
    if (left.kind == "periodic") != (right.kind == "periodic"):
        raise ConfigurationError("periodicity must be set on both opposite sides")
    return left, right


class GridSpec:
    """Uniform 2D Cartesian grid with a vertex-based dual grid.

    Parameters
    ----------
    nx, ny : int
        Number of primal cells, both at least 2.
    dx, dy : float
        Cell sizes.
    origin : tuple of float
        Coordinates of the lower-left vertex.
    bc_x, bc_y : str, Boundary or pair of them
        Boundary closure in x (left, right) and y (bottom, top).
    """

    def __init__(self, nx, ny, dx, dy, origin=(0.0, 0.0), bc_x="periodic", bc_y="periodic"):
        if int(nx) != nx or int(ny) != ny or nx < 2 or ny < 2:
            raise DimensionError(f"grid needs at least 2x2 cells, got {nx}x{ny}")
        if not (dx > 0 and dy > 0):
            raise DimensionError("cell sizes must be positive")
        self.nx, self.ny = int(nx), int(ny)
        self.dx, self.dy = float(dx), float(dy)
        self.origin = (float(origin[0]), float(origin[1]))
        self.left, self.right = _as_pair(bc_x)
        self.bottom, self.top = _as_pair(bc_y)
        self._dirichlet = None

    @classmethod
    def from_bounds(cls, xmin, xmax, ymin, ymax, nx, ny, **kwargs):
        return cls(nx, ny, (xmax - xmin) / nx, (ymax - ymin) / ny, (xmin, ymin), **kwargs)

    def __repr__(self):
        return (f"GridSpec(nx={self.nx}, ny={self.ny}, dx={self.dx:g}, dy={self.dy:g}, "
                f"origin={self.origin}, bc=({self.left.kind}, {self.right.kind}, "
                f"{self.bottom.kind}, {self.top.kind}))")

    # -- geometry -----------------------------------------------------------------

    @property
    def periodic_x(self):
        return self.left.kind == "periodic"

    @property
    def periodic_y(self):
        return self.bottom.kind == "periodic"

    @property
    def cell_shape(self):
        return (self.ny, self.nx)

    @property
    def vertex_shape(self):
        return (self.ny if self.periodic_y else self.ny + 1,
                self.nx if self.periodic_x else self.nx + 1)

    @property
    def volume(self):
        """|Omega_c| = |Omega_p| = dx dy."""
        return self.dx * self.dy

    @property
    def h_vertex(self):
        """Characteristic vertex length 4|Omega_p| / |dOmega_p|."""
        return 2.0 * self.dx * self.dy / (self.dx + self.dy)

    @property
    def lengths(self):
        return self.nx * self.dx, self.ny * self.dy

    def cell_centers(self):
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y)

    def vertices(self):
        nvy, nvx = self.vertex_shape
        x = self.origin[0] + np.arange(nvx) * self.dx
        y = self.origin[1] + np.arange(nvy) * self.dy
        return np.meshgrid(x, y)

    def corner_normal(self, sx, sy):
        """n^{pc} for a cell lying in direction ``(sx, sy)`` from the vertex."""
        return np.array([0.5 * sx * self.dy, 0.5 * sy * self.dx])

    # -- boundary data --------------------------------------------------------------

    def _build_dirichlet(self):
        nvy, nvx = self.vertex_shape
        mask = np.zeros((nvy, nvx), dtype=bool)
        vel = np.zeros((nvy, nvx, 3))
        # top/bottom first so that side walls own the corners
        for side, rows in ((self.bottom, 0), (self.top, -1)):
            if side.is_wall:
                mask[rows, :] = True
                vel[rows, :] = side.velocity if side.kind == "moving-wall" else 0.0
        for side, cols in ((self.left, 0), (self.right, -1)):
            if side.is_wall:
                mask[:, cols] = True
                vel[:, cols] = side.velocity if side.kind == "moving-wall" else 0.0
        self._dirichlet = (mask, vel)

    @property
    def dirichlet_mask(self):
        """Boolean vertex mask of boundary vertices whose velocity is prescribed."""
        if self._dirichlet is None:
            self._build_dirichlet()
        return self._dirichlet[0]

    @property
    def dirichlet_velocity(self):
        if self._dirichlet is None:
            self._build_dirichlet()
        return self._dirichlet[1]

    @property
    def has_dirichlet(self):
        return bool(self.dirichlet_mask.any())

    # -- validation -----------------------------------------------------------------

    def check_cell(self, f, name="field"):
        f = np.asarray(f, dtype=float)
        if f.shape[:2] != self.cell_shape:
            raise DimensionError(f"{name}: expected cell field of shape {self.cell_shape}+..., "
                                 f"got {f.shape}")
        return f

    def check_vertex(self, f, name="field"):
        f = np.asarray(f, dtype=float)
        if f.shape[:2] != self.vertex_shape:
            raise DimensionError(f"{name}: expected vertex field of shape "
                                 f"{self.vertex_shape}+..., got {f.shape}")
        return f

    # -- ghost layers ---------------------------------------------------------------

    def pad_cells(self, f, vector=False):
        """Return ``f`` surrounded by one ring of ghost cells.

        Periodic sides wrap, every other side copies the adjacent interior cell.
        With ``vector=True`` the normal component (last axis) is reflected at
        wall sides.
        """
        f = self.check_cell(f)
        ny, nx = self.cell_shape
        out = np.empty((ny + 2, nx + 2) + f.shape[2:])
        out[1:-1, 1:-1] = f
        if self.periodic_x:
            out[1:-1, 0] = f[:, -1]
            out[1:-1, -1] = f[:, 0]
        else:
            out[1:-1, 0] = f[:, 0]
            out[1:-1, -1] = f[:, -1]
            if vector:
                if self.left.is_wall:
                    out[1:-1, 0, 0] *= -1.0
                if self.right.is_wall:
                    out[1:-1, -1, 0] *= -1.0
        if self.periodic_y:
            out[0] = out[-2]
            out[-1] = out[1]
        else:
            out[0] = out[1]
            out[-1] = out[-2]
            if vector:
                if self.bottom.is_wall:
                    out[0, :, 1] *= -1.0
                if self.top.is_wall:
                    out[-1, :, 1] *= -1.0
        return out

    def close_vertices(self, f):
        """Append the periodic image row/column so every cell sees 4 vertices."""
        f = self.check_vertex(f)
        if self.periodic_x:
            f = np.concatenate([f, f[:, :1]], axis=1)
        if self.periodic_y:
            f = np.concatenate([f, f[:1]], axis=0)
        return f

    def trim_vertices(self, f):
        """Drop the duplicated periodic vertices of an ``(ny+1, nx+1)`` array."""
        if self.periodic_y:
            f = f[:-1]
        if self.periodic_x:
            f = f[:, :-1]
        return f


# -- stencils ------------------------------------------------------------------------

def _corner_diffs(q, dx, dy):
    sw, se = q[:-1, :-1], q[:-1, 1:]
    nw, ne = q[1:, :-1], q[1:, 1:]
    ddx = (se + ne - sw - nw) / (2.0 * dx)
    ddy = (nw + ne - sw - se) / (2.0 * dy)
    return ddx, ddy


def diff_pc(f, grid, vector=False):
    """Vertex values of d/dx and d/dy of a cell field (any trailing shape)."""
    ddx, ddy = _corner_diffs(grid.pad_cells(f, vector=vector), grid.dx, grid.dy)
    return grid.trim_vertices(ddx), grid.trim_vertices(ddy)


def diff_cp(f, grid):
    """Cell values of d/dx and d/dy of a vertex field (any trailing shape)."""
    return _corner_diffs(grid.close_vertices(f), grid.dx, grid.dy)


def _stack3(ddx, ddy):
    return np.stack([ddx, ddy, np.zeros_like(ddx)], axis=-1)


def grad_pc(phi, grid, vector=False):
    """Discrete gradient of a cell field, located at vertices.

    The derivative index is appended as a trailing axis of length 3 whose third
    entry is zero.
    """
    return _stack3(*diff_pc(phi, grid, vector=vector))


def grad_cp(phi, grid):
    """Discrete gradient of a vertex field, located at cell centres."""
    return _stack3(*diff_cp(phi, grid))


def div_pc(a, grid, vector=False):
    """Divergence over the last axis of a cell field, located at vertices."""
    a = grid.check_cell(a)
    if a.shape[-1] != 3:
        raise DimensionError("divergence needs a trailing axis of length 3")
    ddx, ddy = diff_pc(a[..., :2], grid, vector=vector)
    return ddx[..., 0] + ddy[..., 1]


def div_cp(a, grid):
    """Divergence over the last axis of a vertex field, located at cell centres."""
    a = grid.check_vertex(a)
    if a.shape[-1] != 3:
        raise DimensionError("divergence needs a trailing axis of length 3")
    ddx, ddy = diff_cp(a[..., :2], grid)
    return ddx[..., 0] + ddy[..., 1]


def _curl(ddx, ddy):
    # ddx, ddy hold d/dx and d/dy of every component of the last axis
    return np.stack([ddy[..., 2], -ddx[..., 2], ddx[..., 1] - ddy[..., 0]], axis=-1)


def curl_pc(a, grid, vector=False):
    """Curl over the last axis of a cell field, located at vertices."""
    a = grid.check_cell(a)
    if a.shape[-1] != 3:
        raise DimensionError("curl needs a trailing axis of length 3")
    return _curl(*diff_pc(a, grid, vector=vector))


def curl_cp(a, grid):
    """Curl over the last axis of a vertex field, located at cell centres."""
    a = grid.check_vertex(a)
    if a.shape[-1] != 3:
        raise DimensionError("curl needs a trailing axis of length 3")
    return _curl(*diff_cp(a, grid))


def avg_c2p(f, grid, vector=False):
    """Arithmetic mean of the four cells around each vertex (ghosts included)."""
    q = grid.pad_cells(f, vector=vector)
    return grid.trim_vertices(0.25 * (q[:-1, :-1] + q[:-1, 1:] + q[1:, :-1] + q[1:, 1:]))


def avg_p2c(f, grid):
    """Arithmetic mean of the four vertices of each cell."""
    q = grid.close_vertices(f)
    return 0.25 * (q[:-1, :-1] + q[:-1, 1:] + q[1:, :-1] + q[1:, 1:])


def vertex_weights(grid):
    """Dual-cell volumes; boundary vertices of non-periodic sides own half a cell."""
    w = np.full(grid.vertex_shape, grid.volume)
    if not grid.periodic_x:
        w[:, 0] *= 0.5
        w[:, -1] *= 0.5
    if not grid.periodic_y:
        w[0] *= 0.5
        w[-1] *= 0.5
    return w
