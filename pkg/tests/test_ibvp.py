import numpy as np
import pytest

from tcollapse.cauchy import SchemeConfig
from tcollapse.characteristics import BacktraceConfig
from tcollapse.errors import ConfigurationError
from tcollapse.flux import advection, burgers, paper_ibvp, HeavisideReg
from tcollapse.grid import GridSolution
from tcollapse.ibvp import (BoundaryData, Constant, DomainSpec, Ramp, Step, extend_with_boundary,
                            inflow_trace_check, run_ibvp, side_kind, waveform)


def test_domain_collar():
    d = DomainSpec(0, 1, 100, 0.05)
    assert d.n_sigma == 5
    assert d.extended_grid.N == (110,)
    assert d.extended_grid.lo[0] == pytest.approx(-0.05)
    with pytest.raises(ValueError):
        DomainSpec(0, 1, 100, 0.0)


def test_waveforms():
    assert Constant(2.0)(3.0) == 2.0
    assert Step(0.5, 0, 1)(np.array([0.4, 0.5])).tolist() == [0, 1]
    assert Ramp(0, 1, 0, 2)(0.25) == pytest.approx(0.5)
    assert waveform(("step", 1, 0, 1))(2) == 1
    assert waveform(3)(0) == 3
    with pytest.raises(ValueError):
        waveform(("wobble", 1))


def test_boundary_range_is_checked():
    bd = BoundaryData.of(0.0, 2.0, 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        bd.traces(0.0)


def test_extension_fills_collar():
    d = DomainSpec(0, 1, 10, 0.2)
    u = GridSolution(d.grid, 0.0, np.full(10, 0.5))
    ext = extend_with_boundary(u, BoundaryData.of(0.1, 0.9), 0.0, d)
    assert ext.u[:2].tolist() == [0.1, 0.1] and ext.u[-2:].tolist() == [0.9, 0.9]


def test_sigma_too_small_is_a_configuration_error():
    d = DomainSpec(0, 1, 50, 0.01)
    u = GridSolution(d.grid, 0.0, np.zeros(50))
    with pytest.raises(ConfigurationError):
        run_ibvp(u, advection(1.0), BoundaryData.of(0, 0, 0, 1), 1.0, d, SchemeConfig(n=10, M=10))


def test_side_classification():
    m = advection(1.0)
    assert side_kind(m, "left", 0, 1) == "inflow"
    assert side_kind(m, "right", 0, 1) == "outflow"
    assert side_kind(burgers(-1, 1), "left", -1, 1) == "mixed"


def advection_run(right=0.0, N=200, n=100):
    m = advection(1.0)
    d = DomainSpec(0, 1, N, 0.05)
    u0 = GridSolution(d.grid, 0.0, np.zeros(N))
    bd = BoundaryData.of(("step", 0.25, 0, 1), right, 0, 1)
    return m, d, bd, run_ibvp(u0, m, bd, 1.0, d, SchemeConfig(n=n, M=20))


def test_advection_inflow_matches_exact():
    m, d, bd, s = advection_run()
    x = d.grid.centers()
    exact = np.where(x < 0.75, 1.0, 0.0)
    err = np.abs(s.states[-1] - exact).sum() * d.dx
    assert err <= 3 * (d.dx + 1 / 20)
    assert s.boundary.shape == (100, 2)


def test_outflow_data_is_ignored():
    *_, a = advection_run(right=0.0)
    *_, b = advection_run(right=1.0)
    assert np.max(np.abs(a.states - b.states)) <= 1e-12


def test_inflow_trace_check_reports_sides():
    m, d, bd, s = advection_run()
    res = inflow_trace_check(s, m, bd, d, t_min=0.3)
    assert res["left"]["kind"] == "inflow"
    assert res["left"]["deviation"] <= 1e-12
    assert res["right"] == {"kind": "outflow", "deviation": None}


def test_constant_compatible_state_is_steady():
    m = paper_ibvp(1e-4)
    d = DomainSpec(-1, 1, 40, 0.25)
    u0 = GridSolution(d.grid, 0.0, np.zeros(40))
    s = run_ibvp(u0, m, BoundaryData.of(0, 0, -1, 1), 0.2, d, SchemeConfig(n=8, M=20))
    assert np.allclose(s.states, 0.0)


def test_paper_simulation_stays_in_unit_interval():
    m = paper_ibvp(1e-4)
    d = DomainSpec(-1, 1, 100, 0.1)
    H = HeavisideReg(1e-4)
    u0 = GridSolution(d.grid, 0.0, d.grid.cell_averages(H))
    s = run_ibvp(u0, m, BoundaryData.of(0, 1, -1, 1), 0.5, d,
                 SchemeConfig(n=50, M=50, backtrace=BacktraceConfig(resolve=1)))
    assert s.states.min() >= -1e-12 and s.states.max() <= 1 + 1e-12
    # the left region settles to the interface state g u^2 = 1 with g = 4
    assert np.median(s.states[-1][10:40]) == pytest.approx(0.5, abs=0.02)


def test_1d_only():
    from tcollapse.flux import burgers2d
    from tcollapse.grid import SpatialGrid
    d = DomainSpec(0, 1, 10, 0.5)
    with pytest.raises(ConfigurationError):
        run_ibvp(GridSolution(d.grid, 0, np.zeros(10)), burgers2d(), BoundaryData.of(0, 0), 0.1, d)
