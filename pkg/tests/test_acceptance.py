"""Acceptance criteria, each printing one PASS/FAIL line at its stated tolerance."""

import time

import numpy as np
import pytest

from tcollapse import cli
from tcollapse import experiments as ex
from tcollapse.characteristics import DEFAULT_BACKTRACE, oracle_error, sample_points
from tcollapse.config import load_config, preset_names, preset_path
from tcollapse.flux import burgers, paper_ibvp
from tcollapse.verify import operator_property_suite

pytestmark = pytest.mark.slow


def preset(name, **verify):
    cfg = load_config(preset_path(name))
    if verify:
        cfg.verify.update(verify)
    return cfg


def crossing(x, u, level=0.5):
    """Linearly interpolated first position where a decreasing profile falls below ``level``."""
    i = int(np.argmax(u < level))
    return x[i - 1] + (u[i - 1] - level) / (u[i - 1] - u[i]) * (x[i] - x[i - 1])


def summary(checks):
    return "; ".join(f"{c.name}={c.value:.3g}" + (f"<={c.tol:.3g}" if isinstance(c.tol, float) else "")
                     for c in checks)


def test_criterion_1_operator_properties(report):
    start = time.perf_counter()
    res = {r.name: r for r in operator_property_suite(burgers(), trials=100, N=200, M=200, dt=0.01,
                                                      lo=0.0, hi=1.0, seed=0)}
    wall = time.perf_counter() - start
    bounds = {"monotonicity": 1e-12, "conservation": 1e-12, "tv_bound": 1e-12,
              "l1_contraction": 1e-10, "time_continuity": 1e-12}
    ok = all(res[k].worst <= tol for k, tol in bounds.items()) and wall <= 60.0
    text = ", ".join(f"{k} {res[k].worst:.2e}" for k in bounds) + f", runtime {wall:.1f}s <= 60s"
    assert report(1, ok, text)


def test_criterion_2_burgers_shock(report):
    cfg = preset("burgers-shock")
    assert (cfg.N, cfg.M, cfg.n, cfg.t_final) == (400, 400, 100, 0.5)
    start = time.perf_counter()
    out = ex.compare(cfg)
    wall = time.perf_counter() - start
    sol = out["series"].solution(-1)
    dx = sol.grid.dx[0]
    xc = crossing(sol.grid.centers(), sol.u)
    l1 = {r["pair"]: r["l1"] for r in out["rows"]}
    ok = (abs(xc - 0.25) <= 2 * dx and l1["tc-exact"] <= 0.02 and l1["tc-godunov"] <= 0.02
          and wall <= 30.0)
    assert report(2, ok, f"crossing {xc:.5f} (|x-0.25| {abs(xc - 0.25):.2e} <= {2 * dx:.3g}), "
                         f"L1 exact {l1['tc-exact']:.2e} <= 0.02, L1 Godunov {l1['tc-godunov']:.2e} <= 0.02, "
                         f"runtime {wall:.1f}s <= 30s")


def test_criterion_3_burgers_rarefaction(report):
    cfg = preset("burgers-rarefaction")
    cfg.convergence.update(levels=((400, 400, 100), (800, 800, 200)), min_ratio=1.5, max_ratio=3.0)
    rows = ex.convergence(cfg)["rows"]
    err400, err800 = rows[0]["l1_error"], rows[1]["l1_error"]
    ratio = err400 / err800
    ok = err400 <= 0.01 and 1.5 <= ratio <= 3.0
    assert report(3, ok, f"L1 at N=400 {err400:.2e} <= 0.01, at N=800 {err800:.2e}, "
                         f"ratio {ratio:.3f} in [1.5, 3]")


def test_criterion_4_entropy_admissibility(report):
    cfg = preset("burgers-shock")
    model = ex.build_model(cfg)
    kr = ex.suite_kruzhkov(cfg, model)
    ne = ex.suite_nonentropy(cfg, model)
    levels = [c for c in kr if c.name != "kruzhkov_nonincreasing"]
    trend = next(c for c in kr if c.name == "kruzhkov_nonincreasing")
    ok = len(levels) == 3 and all(c.passed for c in kr) and len(ne) == 3 and all(c.passed for c in ne)
    assert report(4, ok, "shock " + summary(levels) + f" ({trend.detail}); non-entropy fixture "
                  + summary(ne).replace("<=", ">") + " (fails at every level)")


def test_criterion_5_characteristics(report):
    model = paper_ibvp(1e-4)
    cfg = preset("paperfig1")
    checks = {c.name: c for c in ex.suite_characteristics(cfg, model)}
    point = np.array([[0.1, 0.0005, 0.5, 0.05]])
    err_point = oracle_error(model, point, DEFAULT_BACKTRACE)
    # the same 100 samples, including feet inside the O(eps) layer that the
    # default step does not resolve; reported, not judged
    every = sample_points(np.random.default_rng(cfg.seed), 100, (0.0, cfg.t_final),
                          (cfg.lo, cfg.hi), (model.a, model.b))
    err_all = oracle_error(model, every, DEFAULT_BACKTRACE)
    ok = all(c.passed for c in checks.values()) and err_point <= 1e-8
    bt, rk, jd = checks["backtrace_vs_oracle"], checks["rk4_order_ratio"], checks["jacobian_defect"]
    assert report(5, ok, f"backtrace vs 2^12-substep oracle {bt.value:.2e} ({bt.detail}) and "
                         f"{err_point:.2e} at (t,x,lam,dt)=(0.1,0.0005,0.5,0.05), both <= 1e-8; "
                         f"RK4 ratio {rk.value:.2f} in [12, 20]; Jacobian defect {jd.value:.2e} <= 1e-5 "
                         f"(informational: {err_all:.2e} over all 100 samples, layer unresolved "
                         f"at default step)")


def test_criterion_6_advection_inflow(report):
    cfg = preset("advection-inflow")
    model = ex.build_model(cfg)
    inflow = ex.suite_inflow(cfg, model)[0]
    outflow = ex.suite_outflow(cfg, model)
    ok = inflow.passed and all(c.passed for c in outflow) and outflow[0].name == "outflow_right_ignored"
    assert report(6, ok, f"L1 vs exact {inflow.value:.2e} <= 3(dx+dlam) = {inflow.tol:.3g}; "
                         f"outflow data change moves the interior by {outflow[0].value:.1e} <= 1e-12")


@pytest.mark.parametrize("name", ["paperfig1", "paperfig2"])
def test_criterion_7_paper_runs(name, report):
    cfg = preset(name, suites=("bounds", "def3", "def1", "implication"))
    assert cfg.t_final == 0.5
    checks = ex.run_suites(cfg)
    ok = all(c.passed for c in checks)
    assert report(7, ok, f"{name}: " + summary(checks))


def test_criterion_8_determinism(tmp_path, report):
    differing = []
    compared = 0
    for name in preset_names():
        dirs = [tmp_path / f"{name}-{k}" for k in (1, 2)]
        for d in dirs:
            assert cli.main(["run", "--config", name, "--out", str(d)]) == 0
        for p in sorted(dirs[0].glob("*.csv")):
            compared += 1
            if p.read_bytes() != (dirs[1] / p.name).read_bytes():
                differing.append(f"{name}/{p.name}")
    ok = not differing and compared > 0
    assert report(8, ok, f"{compared} CSVs over {len(preset_names())} presets, "
                         f"{len(differing)} differ between repeated runs")
