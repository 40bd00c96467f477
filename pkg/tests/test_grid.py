import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gprsplit.exceptions import ConfigurationError, DimensionError
from gprsplit.grid import (Boundary, GridSpec, avg_c2p, avg_p2c, curl_cp, curl_pc, div_cp, div_pc,
                           grad_cp, grad_pc, vertex_weights)


def _interior(f):
    return f[1:-1, 1:-1]


def test_shapes_periodic_and_open():
    g = GridSpec(5, 4, 0.1, 0.2)
    assert g.cell_shape == (4, 5)
    assert g.vertex_shape == (4, 5)
    g = GridSpec(5, 4, 0.1, 0.2, bc_x="transmissive", bc_y="wall")
    assert g.vertex_shape == (5, 6)


def test_too_small_grid():
    with pytest.raises(DimensionError):
        GridSpec(1, 1, 0.1, 0.1)
    with pytest.raises(DimensionError):
        GridSpec(4, 4, 0.0, 0.1)


def test_bad_boundaries():
    with pytest.raises(ConfigurationError):
        Boundary("slip")
    with pytest.raises(ConfigurationError):
        GridSpec(4, 4, 1, 1, bc_x=("periodic", "wall"))
    with pytest.raises(ConfigurationError):
        Boundary("moving-wall", (1.0, 0.0))


def test_h_vertex():
    assert GridSpec(4, 4, 0.01, 0.01).h_vertex == pytest.approx(0.01)
    assert GridSpec(4, 4, 0.02, 0.01).h_vertex == pytest.approx(1.0 / 75.0)


def test_size_mismatch():
    g = GridSpec(4, 4, 1.0, 1.0)
    with pytest.raises(DimensionError):
        grad_pc(np.zeros((3, 4)), g)
    with pytest.raises(DimensionError):
        div_cp(np.zeros((4, 4, 2)), g)


def test_grad_pc_constant_and_linear():
    g = GridSpec(6, 5, 0.3, 0.7, bc_x="transmissive", bc_y="transmissive")
    assert np.all(grad_pc(np.full(g.cell_shape, 5.0), g) == 0.0)
    X, Y = g.cell_centers()
    gr = grad_pc(2 * X + 3 * Y, g)
    np.testing.assert_allclose(_interior(gr), np.broadcast_to([2, 3, 0], _interior(gr).shape),
                               atol=1e-13)


def test_grad_cp_linear():
    g = GridSpec(6, 5, 0.3, 0.7, bc_x="transmissive", bc_y="transmissive")
    assert np.all(grad_cp(np.ones(g.vertex_shape), g) == 0.0)
    _, Y = g.vertices()
    gr = grad_cp(-Y, g)
    np.testing.assert_allclose(gr, np.broadcast_to([0, -1, 0], gr.shape), atol=1e-13)


def test_div_pc_hand_values():
    g = GridSpec(6, 6, 0.25, 0.5, bc_x="transmissive", bc_y="transmissive")
    assert np.all(div_pc(np.broadcast_to([1.0, 1.0, 0.0], g.cell_shape + (3,)), g) == 0.0)
    X, Y = g.cell_centers()
    a = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    np.testing.assert_allclose(_interior(div_pc(a, g)), 2.0, atol=1e-13)


def test_curl_pc_rotation():
    g = GridSpec(6, 6, 0.25, 0.5, bc_x="transmissive", bc_y="transmissive")
    X, Y = g.cell_centers()
    c = curl_pc(np.stack([-Y, X, np.zeros_like(X)], axis=-1), g)
    np.testing.assert_allclose(_interior(c)[..., :2], 0.0, atol=1e-13)
    np.testing.assert_allclose(_interior(c)[..., 2], 2.0, atol=1e-13)


def test_averages():
    g = GridSpec(5, 4, 0.2, 0.3, bc_x="transmissive", bc_y="transmissive")
    np.testing.assert_allclose(avg_c2p(np.full(g.cell_shape, 3.5), g), 3.5)
    np.testing.assert_allclose(avg_p2c(np.full(g.vertex_shape, -1.0), g), -1.0)
    X, Y = g.cell_centers()
    Xv, Yv = g.vertices()
    np.testing.assert_allclose(_interior(avg_c2p(2 * X - Y, g)), _interior(2 * Xv - Yv), atol=1e-13)
    Xc, Yc = g.cell_centers()
    np.testing.assert_allclose(avg_p2c(2 * Xv - Yv, g), 2 * Xc - Yc, atol=1e-13)
    eye = np.broadcast_to(np.eye(3), g.cell_shape + (3, 3))
    np.testing.assert_allclose(avg_c2p(eye, g), np.broadcast_to(np.eye(3), g.vertex_shape + (3, 3)))


def test_wall_reflection_of_normal_component():
    g = GridSpec(4, 4, 1.0, 1.0, bc_x="wall", bc_y="transmissive")
    v = np.zeros(g.cell_shape + (3,))
    v[..., 0] = 1.0
    v[..., 1] = 2.0
    pad = g.pad_cells(v, vector=True)
    assert np.all(pad[1:-1, 0, 0] == -1.0) and np.all(pad[1:-1, 0, 1] == 2.0)
    # averaged to the wall the normal component vanishes
    assert np.all(avg_c2p(v, g, vector=True)[:, 0, 0] == 0.0)


def test_dirichlet_mask_corners_belong_to_side_walls():
    lid = Boundary("moving-wall", (1.0, 0.0, 0.0))
    g = GridSpec(4, 4, 0.25, 0.25, bc_x="wall", bc_y=("wall", lid))
    m, v = g.dirichlet_mask, g.dirichlet_velocity
    assert m[0].all() and m[-1].all() and m[:, 0].all() and m[:, -1].all()
    assert not m[1:-1, 1:-1].any()
    np.testing.assert_array_equal(v[-1, 1:-1, 0], 1.0)
    assert v[-1, 0, 0] == 0.0 and v[-1, -1, 0] == 0.0


def test_vertex_weights_sum_to_domain_area():
    for bcs in (("periodic", "periodic"), ("wall", "transmissive")):
        g = GridSpec(5, 3, 0.2, 0.5, bc_x=bcs[0], bc_y=bcs[1])
        assert vertex_weights(g).sum() == pytest.approx(5 * 0.2 * 3 * 0.5)


grids = st.tuples(st.integers(2, 12), st.integers(2, 12), st.floats(0.1, 3.0),
                  st.floats(0.1, 3.0), st.integers(0, 2**31 - 1))


@settings(max_examples=40, deadline=None)
@given(grids)
def test_discrete_identities_property(args):
    nx, ny, dx, dy, seed = args
    g = GridSpec(nx, ny, dx, dy)
    r = np.random.default_rng(seed)
    phi_c = r.standard_normal(g.cell_shape)
    phi_p = r.standard_normal(g.vertex_shape)
    a_c = r.standard_normal(g.cell_shape + (3,))
    a_p = r.standard_normal(g.vertex_shape + (3,))
    assert np.abs(curl_cp(grad_pc(phi_c, g), g)).max() <= 1e-13 * max(1, np.abs(phi_c).max() / min(dx, dy) ** 2)
    assert np.abs(curl_pc(grad_cp(phi_p, g), g)).max() <= 1e-12 * max(1, 1 / min(dx, dy) ** 2)
    assert np.abs(div_pc(curl_cp(a_p, g), g)).max() <= 1e-12 * max(1, 1 / min(dx, dy) ** 2)
    assert np.abs(div_cp(curl_pc(a_c, g), g)).max() <= 1e-12 * max(1, 1 / min(dx, dy) ** 2)
    # summation by parts: <div_cp a, phi>_c = -<a, grad_pc phi>_p
    lhs = np.sum(div_cp(a_p, g) * phi_c)
    rhs = -np.sum(a_p * grad_pc(phi_c, g))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), np.sum(np.abs(a_p)) / min(dx, dy))


def test_rows_built_from_vertex_potential_are_curl_free(rng):
    """Cell rows that are gradients of a vertex potential have zero discrete curl."""
    g = GridSpec(10, 7, 0.3, 0.2)
    phi = rng.standard_normal(g.vertex_shape)
    c = curl_pc(grad_cp(phi, g), g)
    assert np.abs(c).max() <= 1e-12
