import numpy as np
import pytest

from tcollapse.characteristics import (BacktraceConfig, backtrace, backtrace_heterogeneous,
                                       backtrace_homogeneous, continuity_moduli, forward_trace,
                                       jacobian_defect, oracle_error, richardson_oracle,
                                       rk4_order_ratio, sample_points)
from tcollapse.errors import RegionExitError
from tcollapse.flux import FluxModel, advection, burgers, paper_ibvp


def test_homogeneous_examples():
    ep = backtrace_homogeneous(lambda l: l, 1.0, 2.0, 0.25)
    assert (ep.x0, ep.lam0) == (0.5, 2.0)
    ep = backtrace_homogeneous(lambda l: 1.0 + 0 * np.asarray(l), 0.0, 0.3, 0.5)
    assert (float(ep.x0), float(ep.lam0)) == (-0.5, 0.3)


@pytest.mark.parametrize("model", [burgers(), advection(1.0), paper_ibvp(1e-4)])
def test_zero_step_is_identity(model):
    ep = backtrace(model, 0.3, np.array([0.1, -0.2]), np.array([0.4, 0.9]), 0.0)
    assert np.array_equal(ep.x0, [0.1, -0.2])
    assert np.array_equal(ep.lam0, [0.4, 0.9])


def test_integrator_matches_fast_path_for_homogeneous(burgers_model):
    x = np.linspace(-1, 1, 9)
    lam = np.linspace(0, 1, 9)
    fast = backtrace_homogeneous(lambda l: l, x, lam, 0.1)
    slow = backtrace_heterogeneous(burgers_model, 0.5, x, lam, 0.1)
    assert np.max(np.abs(slow.x0 - fast.x0)) <= 1e-14
    assert np.array_equal(slow.lam0, lam)


def test_paper_example_point_against_oracle(paper_model):
    err = oracle_error(paper_model, [[0.1, 0.0005, 0.5, 0.05]])
    assert err <= 1e-8


def test_oracle_is_richardson_improved(paper_model):
    fine = backtrace_heterogeneous(paper_model, 0.1, 0.5, 0.3, 0.05, substeps=2 ** 12)
    ora = richardson_oracle(paper_model, 0.1, 0.5, 0.3, 0.05)
    assert abs(float(fine.x0 - ora.x0)) < 1e-12


def test_rk4_order_ratio_near_sixteen():
    smooth = paper_ibvp(8.0)
    S = sample_points(np.random.default_rng(2), 50, dt_range=(0.1, 0.1))
    assert 12.0 <= rk4_order_ratio(smooth, S) <= 20.0


def test_jacobian_defect_small_for_paper_flux(paper_model):
    S = sample_points(np.random.default_rng(1), 100)
    assert jacobian_defect(paper_model, S) <= 1e-5


def test_jacobian_defect_exact_cases(burgers_model, paper_model):
    S = sample_points(np.random.default_rng(3), 20)
    assert jacobian_defect(burgers_model, S) <= 1e-12
    S[:, 3] = 0.0
    assert jacobian_defect(paper_model, S) <= 1e-12


def test_backward_forward_consistency():
    m = paper_ibvp(0.5)
    cfg = BacktraceConfig(h_max=0.05 / 16)
    x = np.array([-0.7, -0.1, 0.4])
    lam = np.array([0.2, -0.6, 0.8])
    ep = backtrace_heterogeneous(m, 0.3, x, lam, 0.05, cfg)
    fwd = forward_trace(m, 0.25, ep.x0, ep.lam0, 0.05, 16)
    assert np.max(np.abs(fwd.x0 - x)) <= 1e-8
    assert np.max(np.abs(fwd.lam0 - lam)) <= 1e-8


def test_region_exit_carries_time():
    base = advection(1.0)
    m = FluxModel(name="bounded", dim=1, flux=base.flux, fprime=base.fprime,
                  div_x=lambda t, x, lam: 0.0 * x, heterogeneous=True, region=(0.0, 1.0))
    with pytest.raises(RegionExitError) as info:
        backtrace_heterogeneous(m, 1.0, 0.05, 0.5, 0.5)
    assert 0.5 <= info.value.exit_time <= 1.0


@pytest.mark.parametrize("model", [burgers(), advection(2.0)])
def test_continuity_moduli_homogeneous(model):
    rx, rl, bx, bl = continuity_moduli(model, 0.5, 0.1, [(0.0, 0.01, 0.3), (0.5, 0.02, 0.7)])
    assert rx == pytest.approx(1.0)
    assert rl == 0.0


def test_continuity_moduli_within_bounds():
    m = paper_ibvp(0.5)
    probes = [(x, 1e-4, lam) for x in np.linspace(-0.8, 0.8, 9) for lam in (-0.5, 0.2, 0.9)]
    rx, rl, bx, bl = continuity_moduli(m, 0.3, 0.05, probes)
    assert rx <= 1.1 * bx
    assert rl <= 1.1 * bl
