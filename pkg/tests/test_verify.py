import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcollapse.cauchy import SchemeConfig, run_scheme
from tcollapse.errors import ConfigurationError
from tcollapse.flux import advection, burgers, paper_ibvp
from tcollapse.grid import GridSolution, Series, SpatialGrid
from tcollapse.ibvp import BoundaryData, DomainSpec, run_ibvp
from tcollapse.verify import (EntropyReport, Hat, PINNED_C1, TestFunctionBank,
                              boundary_def3_residual, calibrated_tol, implication_check,
                              k_grid, kinetic_p, kinetic_residual, kruzhkov_residual,
                              operator_property_suite, otto_def1_residual, ramp_bank,
                              refinement_h)
from tcollapse.verify.entropy import def3_boundary_term, measure_constant, sgn_minus, sgn_plus
from tcollapse.verify.fixtures import burgers_expansion_shock, riemann_jump_series
from tcollapse.verify.testfns import hat_primitive


@settings(max_examples=80, deadline=None)
@given(c=st.floats(-1, 1), r=st.floats(0.01, 1), lo=st.floats(-3, 3), w=st.floats(0, 3))
def test_hat_integral_matches_quadrature(c, r, lo, w):
    h = Hat(c, r)
    x = np.linspace(lo, lo + w, 20001)
    assert h.integral(lo, lo + w) == pytest.approx(np.trapezoid(h(x), x), abs=1e-6)


def test_hat_primitive_total_mass():
    assert hat_primitive(10.0, 0.0, 0.5) == pytest.approx(0.5)


def test_lattice_bank_shape_and_support():
    bank = TestFunctionBank.lattice(-1, 1, 0.5)
    assert len(bank) == 50
    for fn in bank:
        assert fn.X.c - fn.X.r >= -1 - 1e-12 and fn.X.c + fn.X.r <= 1 + 1e-12
        # every function vanishes at the final time
        assert fn.T(0.5) == 0.0
    touching = TestFunctionBank.lattice(-1, 1, 0.5, touch_boundary=True)
    assert {fn.X.c for fn in touching} >= {-1.0, 1.0}


def test_split_unresolved():
    bank = TestFunctionBank.lattice(-1, 1, 0.5, touch_boundary=True)
    kept, out = bank.split_unresolved((0.0,), 1e-4, 0.02)
    assert len(kept) + len(out) == 50
    assert all(not (fn.X.c - fn.X.r <= 0 <= fn.X.c + fn.X.r) for fn in kept)
    same, none = bank.split_unresolved((0.0,), 0.1, 0.02)
    assert len(same) == 50 and len(none) == 0


def test_k_grid_default_count():
    assert len(k_grid(0, 1)) == 21


def test_semi_sign_functions():
    v = np.array([-1.0, 0.0, 2.0])
    assert sgn_plus(v).tolist() == [0, 0, 1]
    assert sgn_minus(v).tolist() == [-1, 0, 0]


def test_report_csv_and_summary():
    vals = np.array([1 / 3, -2e-3])
    r = EntropyReport(["kruzhkov"] * 2, ["a", "b"], [0.0, 0.5], vals, "le", 0.5)
    lines = r.to_csv().splitlines()
    assert lines[0] == "inequality,phi_id,k,residual"
    assert lines[1] == "kruzhkov,a,0,0.33333333333333331"
    # 17 significant digits round-trip exactly
    assert [float(line.split(",")[3]) for line in lines[1:]] == vals.tolist()
    assert r.passed and "PASS" in r.summary()
    assert r.with_tol(0.1).passed is False


def constant_series(value, lo=-1, hi=1, N=40, n=10, T=0.5, boundary=None):
    g = SpatialGrid.uniform(lo, hi, N)
    states = np.full((n + 1, N), float(value))
    return Series(g, np.linspace(0, T, n + 1), states, boundary=boundary)


def test_kruzhkov_vanishes_on_constant_solution(burgers_model):
    s = constant_series(0.4)
    r = kruzhkov_residual(s, burgers_model, TestFunctionBank.lattice(-1, 1, 0.5), k_grid(0, 1))
    assert np.max(np.abs(r.residual)) <= 1e-12


def test_kruzhkov_rejects_bank_outside_domain(burgers_model):
    s = constant_series(0.4)
    with pytest.raises(ConfigurationError):
        kruzhkov_residual(s, burgers_model, TestFunctionBank.lattice(-2, 2, 0.5), k_grid(0, 1))


def test_kruzhkov_detects_expansion_shock(burgers_model):
    s = burgers_expansion_shock(400, 100)
    r = kruzhkov_residual(s, burgers_model, TestFunctionBank.lattice(-1, 1, 0.5), k_grid(0, 1))
    tol = calibrated_tol(PINNED_C1["kruzhkov"], refinement_h(s, 400, 1.0))
    assert r.violation >= 10 * tol


def test_kruzhkov_accepts_exact_shock(burgers_model):
    s = riemann_jump_series(1.0, 0.0, 0.5, -1, 1, 400, 100, 0.5)
    r = kruzhkov_residual(s, burgers_model, TestFunctionBank.lattice(-1, 1, 0.5), k_grid(0, 1))
    tol = calibrated_tol(PINNED_C1["kruzhkov"], refinement_h(s, 400, 1.0))
    assert r.passed or r.violation <= tol


def test_def3_boundary_term_only_counts_inflow():
    m = advection(1.0)
    # left side of advection with c = 1 is inflow: (f' nu)_- = 1
    assert def3_boundary_term(m, "plus", 0.2, 0.7, 0.0, 0.0, -1.0, 0.0, 1.0) == pytest.approx(0.5)
    # right side is outflow: nothing enters
    assert def3_boundary_term(m, "plus", 0.2, 0.7, 0.0, 1.0, 1.0, 0.0, 1.0) == 0.0


def test_boundary_residuals_of_constant_state():
    m = paper_ibvp(1e-4)
    bnd = np.zeros((10, 2))
    s = constant_series(0.0, n=10, boundary=bnd)
    bank = TestFunctionBank.lattice(-1, 1, 0.5, touch_boundary=True)
    d3 = boundary_def3_residual(s, m, None, bank, k_grid(-1, 1))
    d1 = otto_def1_residual(s, m, None, bank, k_grid(-1, 1))
    assert d3.residual.min() >= -1e-12
    assert d1.residual.min() >= -1e-12


def advection_ibvp(N=200, n=100):
    m = advection(1.0)
    d = DomainSpec(0, 1, N, 0.05)
    bd = BoundaryData.of(("step", 0.25, 0, 1), 0.0, 0, 1)
    u0 = GridSolution(d.grid, 0.0, np.zeros(N))
    return m, bd, run_ibvp(u0, m, bd, 1.0, d, SchemeConfig(n=n, M=20))


def test_def1_dominates_def3_termwise():
    m, bd, s = advection_ibvp()
    bank = TestFunctionBank.lattice(0, 1, 1.0, touch_boundary=True)
    d3 = boundary_def3_residual(s, m, bd, bank, k_grid(0, 1))
    d1 = otto_def1_residual(s, m, bd, bank, k_grid(0, 1), L=m.L)
    imp = implication_check(d3, d1)
    assert imp["holds"]
    assert len(d3.residual) == 50 * 21 * 2


def test_advection_boundary_residuals_first_order_in_dt():
    m, bd, s = advection_ibvp(400, 200)
    bank = TestFunctionBank.lattice(0, 1, 1.0, touch_boundary=True)
    d3 = boundary_def3_residual(s, m, bd, bank, k_grid(0, 1))
    dt = 1.0 / 200
    assert d3.violation <= 0.5 * dt


def test_kinetic_p_is_semi_sign():
    s = constant_series(0.3)
    assert np.all(kinetic_p(s, 0.1, "plus") == 1)
    assert np.all(kinetic_p(s, 0.5, "minus") == -1)
    assert np.all(kinetic_p(s, 0.3, "plus") == 0)


def test_kinetic_residual_constant_state():
    m = advection(1.0)
    s = constant_series(0.0, lo=0, hi=1, boundary=np.zeros((10, 2)))
    r = kinetic_residual(s, m, None, TestFunctionBank.lattice(0, 1, 0.5, touch_boundary=True))
    assert r.residual.min() >= -1e-12
    ups, downs = ramp_bank(0, 1)
    assert len(r.residual) == 50 * (len(ups) + len(downs))


def test_property_suite_burgers_passes(burgers_model):
    res = operator_property_suite(burgers_model, trials=10)
    assert all(r.passed for r in res), res


def test_property_suite_heterogeneous_tv_bound():
    res = {r.name: r for r in operator_property_suite(paper_ibvp(1e-4), trials=10, N=200, M=100,
                                                      dt=0.005, lo=-1, hi=1)}
    assert res["tv_bound"].passed
    assert res["monotonicity"].passed
    assert res["conservation"].tol is None


def test_measure_constant():
    assert measure_constant([0.1, 0.05], [1.0, 0.25]) == pytest.approx(0.2)
