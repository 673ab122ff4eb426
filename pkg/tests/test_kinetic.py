import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcollapse.errors import RangeError
from tcollapse.kinetic import (LambdaGrid, cell_masses, chi, chi_cell_mass, collapse,
                               collapse_field, lift)


@pytest.mark.parametrize("lam,u,expected", [
    (0.5, 1.0, 1), (1.5, 1.0, 0), (-0.5, -1.0, -1), (0.5, -1.0, 0), (-0.5, 1.0, 0), (0.3, 0.0, 0),
])
def test_chi_values(lam, u, expected):
    assert chi(lam, u) == expected


def test_cell_mass_partial_cell():
    assert chi_cell_mass(0.0, 0.5, 0.2) == pytest.approx(0.2)
    assert chi_cell_mass(-0.5, 0.0, -0.2) == pytest.approx(-0.2)
    assert chi_cell_mass(0.5, 1.0, 0.2) == 0.0


def test_origin_clamps_to_range():
    assert LambdaGrid(-1, 1, 4).origin == 0.0
    assert LambdaGrid(2, 3, 4).origin == 2.0
    assert LambdaGrid(-3, -2, 4).origin == -2.0


@settings(max_examples=200, deadline=None)
@given(u=st.floats(-1, 1, allow_nan=False), M=st.integers(2, 64))
def test_collapse_inverts_lift(u, M):
    g = LambdaGrid(-1.0, 1.0, M)
    assert collapse(lift(u, g)) == pytest.approx(u, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(u=st.floats(2.0, 3.0, allow_nan=False))
def test_collapse_with_shifted_origin(u):
    g = LambdaGrid(2.0, 3.0, 7)
    assert collapse(lift(u, g)) == pytest.approx(u, abs=1e-15)


def test_lift_rejects_out_of_range():
    with pytest.raises(RangeError):
        lift(1.5, LambdaGrid(0, 1, 4))


def test_cell_masses_field_shape_and_collapse():
    g = LambdaGrid(0, 1, 10)
    u = np.linspace(0, 1, 7)
    m = cell_masses(u, g)
    assert m.shape == (10, 7)
    assert np.allclose(collapse_field(m, g.origin), u, atol=1e-15)
    assert np.all(m >= 0) and np.all(m <= g.width + 1e-15)


def test_collapse_is_exact_sum():
    masses = np.array([0.1] * 10)
    assert collapse(masses) == math.fsum(masses)
