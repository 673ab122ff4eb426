import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcollapse.errors import SupportOverflowError
from tcollapse.grid import (GridSolution, Series, SpatialGrid, average_at, check_support,
                            phase_average_at, shift_rows, tv)


def test_uniform_grid_geometry():
    g = SpatialGrid.uniform(-1, 1, 8)
    assert g.dx == (0.25,)
    assert g.faces()[-1] == 1.0
    assert np.allclose(g.centers(), -1 + 0.25 * (np.arange(8) + 0.5))


def test_grid_validation():
    with pytest.raises(ValueError):
        SpatialGrid.uniform(0, 1, 2)
    with pytest.raises(ValueError):
        SpatialGrid.uniform(1, 0, 10)


def test_cell_averages_of_linear_function_are_centre_values():
    g = SpatialGrid.uniform(0, 1, 10)
    assert np.allclose(g.cell_averages(lambda x: 3 * x + 1), 3 * g.centers() + 1)


def test_shift_by_whole_cells_is_a_translation():
    u = np.array([[0, 0, 1, 2, 0, 0, 0, 0.0]])
    out = shift_rows(u, np.array([0.5]), 0.25, "zero")
    assert np.allclose(out, [[0, 0, 0, 0, 1, 2, 0, 0]])


def test_shift_half_cell_averages_neighbours():
    u = np.array([[0, 0, 1, 0, 0, 0.0]])
    out = shift_rows(u, np.array([0.5]), 1.0, "zero")
    assert np.allclose(out, [[0, 0, 0.5, 0.5, 0, 0]])


@settings(max_examples=60, deadline=None)
@given(s=st.floats(-3.0, 3.0), seed=st.integers(0, 2 ** 16))
def test_shift_conserves_and_is_convex(s, seed):
    rng = np.random.default_rng(seed)
    u = np.zeros((1, 40))
    u[0, 10:30] = rng.uniform(0, 1, 20)
    out = shift_rows(u, np.array([s]), 1.0, "zero")
    assert out.sum() == pytest.approx(u.sum(), abs=1e-12)
    assert out.min() >= -1e-15 and out.max() <= u.max() + 1e-15
    assert tv(out[0]) <= tv(u[0]) + 1e-12


def test_periodic_shift_wraps():
    u = np.array([[1.0, 0, 0, 0]])
    assert np.allclose(shift_rows(u, np.array([-1.0]), 1.0, "periodic"), [[0, 0, 0, 1]])


def test_check_support_raises_near_edge():
    u = np.zeros(10)
    u[1] = 1
    with pytest.raises(SupportOverflowError):
        check_support(u, 2, "compact_support")
    check_support(u, 2, "extend")


def test_tv_with_closures():
    u = np.array([1.0, 2.0, 0.0])
    assert tv(u, "extend") == 3.0
    assert tv(u, "compact_support") == 4.0
    assert tv(u, "periodic") == 4.0


def test_average_at_interpolates_centres():
    g = SpatialGrid.uniform(0, 4, 4)
    u = np.array([0.0, 1.0, 2.0, 3.0])
    assert np.allclose(average_at(u, g, np.array([1.0, 2.0]), "extend"), [0.5, 1.5])
    assert average_at(u, g, np.array([10.0]), "zero")[0] == 0.0


def test_phase_average_equals_shift_for_straight_characteristics():
    g = SpatialGrid.uniform(0, 1, 20)
    rng = np.random.default_rng(0)
    masses = rng.uniform(0, 0.1, (5, 20))
    lam_mid = (np.arange(5) + 0.5) / 5
    shifts = 0.037 * (1 + np.arange(5))
    feet_x = g.centers()[None, :] - shifts[:, None]
    feet_lam = np.broadcast_to(lam_mid[:, None], feet_x.shape)
    got = phase_average_at(masses, g, 0.0, 0.2, feet_x, feet_lam, "zero")
    want = shift_rows(masses, shifts, g.dx[0], "zero")
    assert np.allclose(got, want, atol=1e-15)


def test_phase_average_is_zero_beyond_lambda_range():
    g = SpatialGrid.uniform(0, 1, 8)
    masses = np.ones((4, 8))
    out = phase_average_at(masses, g, 0.0, 0.25, g.centers(), np.full(8, 2.0), "extend")
    assert np.all(out == 0)


def test_series_interpolates_between_levels():
    g = SpatialGrid.uniform(0, 1, 4)
    s = Series(g, np.array([0.0, 1.0]), np.array([np.zeros(4), np.ones(4)]))
    assert np.allclose(s.at(0.25).u, 0.25)
    assert s.at(5.0).t == 1.0
    assert s.t_final == 1.0


def test_grid_solution_checks_shape_and_finiteness():
    g = SpatialGrid.uniform(0, 1, 4)
    with pytest.raises(ValueError):
        GridSolution(g, 0.0, np.zeros(5))
    with pytest.raises(ValueError):
        GridSolution(g, 0.0, np.array([0, 1, np.nan, 0]))
    assert GridSolution(g, 0.0, np.ones(4)).mass() == pytest.approx(1.0)
