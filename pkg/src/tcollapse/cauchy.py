"""
The discrete transport-collapse operator T(dt) and the iterated scheme
for Cauchy problems.

Homogeneous fluxes: each lambda cell of the kinetic mass field is
translated by f'(lambda_j) dt with the exact piecewise-constant remap and
the masses are summed back (collapse). Since the masses of a cell value
are exact and the remap is a convex combination per row, the step is
linear in the mass field, hence conservative, monotone and TVD.

Heterogeneous fluxes: every (x_i, lambda_j) pair is traced back to its
foot (x0, lambda0) and the new value collects, over j, the cell-window
average of the kinetic mass field at (x0, lambda0). The average is
bilinear in (x, lambda), so the step stays monotone, and for an
x-independent flux (lambda0 = lambda_j) it coincides with the exact remap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from tcollapse.characteristics import (BacktraceConfig, DEFAULT_BACKTRACE,
                                       backtrace_heterogeneous)
from tcollapse.flux import FluxModel, eval_flux_deriv
from tcollapse.grid import (CLOSURES, GridSolution, Series, SpatialGrid,
                            check_support, phase_average_at, shift_rows)
from tcollapse.kinetic import LambdaGrid, cell_masses, collapse_field


@dataclass(frozen=True)
class SchemeConfig:
    n: int = 100
    M: int = 100
    backtrace: BacktraceConfig = DEFAULT_BACKTRACE
    closure: str = "compact_support"
    # report query times by convex combination of bracketing iterates
    alpha: bool = True
    # lambda range; None means the model's [a, b]
    lam_range: Optional[tuple] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1 steps")
        if self.M < 2:
            raise ValueError("need M >= 2 lambda cells")
        if self.closure not in CLOSURES:
            raise ValueError(f"unknown closure {self.closure!r}; expected one of {CLOSURES}")

    def lambda_grid(self, model: FluxModel) -> LambdaGrid:
        lo, hi = self.lam_range if self.lam_range is not None else (model.a, model.b)
        return LambdaGrid(float(lo), float(hi), self.M)


def _lambda_grid(model, M):
    return M if isinstance(M, LambdaGrid) else LambdaGrid(model.a, model.b, int(M))


def tc_step_homogeneous(state: GridSolution, model: FluxModel, dt: float, M,
                        closure: str = "compact_support") -> GridSolution:
    """One transport-collapse step for an x-independent flux."""
    if model.heterogeneous:
        raise ValueError("tc_step_homogeneous needs a homogeneous flux")
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return state.copy()
    lg = _lambda_grid(model, M)
    grid = state.grid
    masses = cell_masses(state.u, lg)
    speeds = eval_flux_deriv(model, state.t, np.zeros((grid.dim,) if grid.dim > 1 else ()),
                             lg.midpoints[:, None] if grid.dim > 1 else lg.midpoints)
    if grid.dim == 1:
        speeds = np.asarray(speeds, dtype=float).reshape(1, -1)
    else:
        # (2, M, 1) -> (2, M)
        speeds = np.asarray(speeds, dtype=float).reshape(2, -1)
    for axis in range(grid.dim):
        shifts = speeds[axis] * dt
        k = int(np.ceil(np.abs(shifts).max() / grid.dx[axis])) if shifts.size else 0
        check_support(state.u, k, closure)
        masses = shift_rows(masses, shifts, grid.dx[axis], closure, axis=axis + 1)
    return GridSolution(grid, state.t + dt, collapse_field(masses, lg.origin))


@dataclass
class BacktraceTable:
    """Feet of the characteristics through every (lambda_j, x_i) pair."""

    t: float
    dt: float
    x0: np.ndarray
    lam0: np.ndarray


def backtrace_table(model: FluxModel, grid: SpatialGrid, lg: LambdaGrid, t: float, dt: float,
                    cfg: BacktraceConfig = DEFAULT_BACKTRACE) -> BacktraceTable:
    """Backtrace from (t + dt, x_i, lambda_j); arrays have lambda on axis 0."""
    lam = lg.midpoints.reshape((-1,) + (1,) * grid.dim)
    x = grid.x
    if grid.dim == 1:
        x = x[None, :]
    else:
        x = x[:, None]
    ep = backtrace_heterogeneous(model, t + dt, x, lam, dt, cfg)
    return BacktraceTable(t, dt, ep.x0, ep.lam0)


def tc_step_heterogeneous(state: GridSolution, model: FluxModel, t: float, dt: float, M,
                          cfg: BacktraceConfig = DEFAULT_BACKTRACE,
                          closure: str = "compact_support",
                          table: Optional[BacktraceTable] = None) -> GridSolution:
    """One transport-collapse step through backtraced characteristics.

    A precomputed ``table`` may be passed for time-independent fluxes,
    where the feet do not depend on the step's start time.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return state.copy()
    lg = _lambda_grid(model, M)
    grid = state.grid
    if table is None:
        table = backtrace_table(model, grid, lg, t, dt, cfg)
    elif abs(table.dt - dt) > 1e-14 * max(1.0, dt):
        raise ValueError("backtrace table was built for another step size")
    if closure == "compact_support":
        k = int(np.ceil(model.L * dt / min(grid.dx))) + 1
        check_support(state.u, k, closure)
    masses = cell_masses(state.u, lg)
    moved = phase_average_at(masses, grid, lg.lo, lg.width, table.x0, table.lam0, closure)
    return GridSolution(grid, state.t + dt, collapse_field(moved, lg.origin))


def tc_step(state: GridSolution, model: FluxModel, dt: float, cfg: SchemeConfig,
            table: Optional[BacktraceTable] = None) -> GridSolution:
    lg = cfg.lambda_grid(model)
    if model.heterogeneous:
        return tc_step_heterogeneous(state, model, state.t, dt, lg, cfg.backtrace,
                                     cfg.closure, table)
    return tc_step_homogeneous(state, model, dt, lg, cfg.closure)


def run_scheme(u0: GridSolution, model: FluxModel, t_final: float,
               cfg: SchemeConfig = SchemeConfig(),
               progress: Optional[Callable[[int, GridSolution], None]] = None) -> Series:
    """Apply T(t_final / n) n times starting from ``u0``; all iterates are kept."""
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    dt = t_final / cfg.n
    states = [u0.u.copy()]
    times = [u0.t]
    state = u0
    table = None
    if model.heterogeneous and not model.time_dependent:
        table = backtrace_table(model, u0.grid, cfg.lambda_grid(model), u0.t, dt, cfg.backtrace)
    for k in range(cfg.n):
        state = tc_step(state, model, dt, cfg, table)
        # keep the nominal time exact instead of accumulating dt
        state = GridSolution(state.grid, u0.t + (k + 1) * dt, state.u)
        states.append(state.u.copy())
        times.append(state.t)
        if progress is not None:
            progress(k + 1, state)
    return Series(u0.grid, np.array(times), np.array(states),
                  meta={"dt": dt, "n": cfg.n, "M": cfg.M, "closure": cfg.closure,
                        "alpha": cfg.alpha})


def query(series: Series, t: float) -> GridSolution:
    """Scheme value at time t: interpolated if the run used alpha, else the last iterate <= t."""
    if series.meta.get("alpha", True):
        return series.at(t)
    k = int(np.searchsorted(series.times, t + 1e-14, side="right") - 1)
    return series.solution(max(k, 0))


# {{{ convergence

@dataclass
class CauchyProblem:
    """Initial data, flux and (optionally) an exact solution u(t, x) for error tables."""

    name: str
    model: FluxModel
    lo: float
    hi: float
    u0: Callable[[np.ndarray], np.ndarray]
    t_final: float
    exact: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    closure: str = "extend"
    backtrace: BacktraceConfig = DEFAULT_BACKTRACE
    extra: dict = field(default_factory=dict)

    def initial(self, N: int) -> GridSolution:
        grid = SpatialGrid.uniform(self.lo, self.hi, N)
        return GridSolution(grid, 0.0, grid.cell_averages(self.u0))

    def scheme(self, n: int, M: int) -> SchemeConfig:
        return SchemeConfig(n=n, M=M, backtrace=self.backtrace, closure=self.closure)


def l1_error(sol: GridSolution, exact: Callable[[float, np.ndarray], np.ndarray]) -> float:
    ref = sol.grid.cell_averages(lambda x: exact(sol.t, x))
    return float(np.abs(sol.u - ref).sum() * sol.grid.cell_volume)


def convergence_study(problem: CauchyProblem, grids: Sequence[int], ns: Sequence[int],
                      Ms: Optional[Sequence[int]] = None, reference=None) -> list:
    """L1 errors at t_final over a sequence of refinement levels.

    ``reference`` may replace the exact solution: a callable taking the
    final GridSolution and returning reference cell values.
    Rows carry the ratio to the previous level's error.
    """
    Ms = list(grids) if Ms is None else list(Ms)
    if not len(grids) == len(ns) == len(Ms):
        raise ValueError("grids, ns and Ms must have equal length")
    if problem.exact is None and reference is None:
        raise ValueError("convergence study needs an exact solution or a reference")
    rows = []
    prev = None
    for N, n, M in zip(grids, ns, Ms):
        u0 = problem.initial(N)
        series = run_scheme(u0, problem.model, problem.t_final, problem.scheme(n, M))
        sol = series.solution(-1)
        if reference is not None:
            err = float(np.abs(sol.u - reference(sol)).sum() * sol.grid.cell_volume)
        else:
            err = l1_error(sol, problem.exact)
        ratio = prev / err if prev is not None and err > 0 else float("nan")
        rows.append({"N": N, "M": M, "n": n, "dx": u0.grid.dx[0],
                     "dlam": (problem.model.b - problem.model.a) / M,
                     "dt": problem.t_final / n, "l1_error": err, "ratio": ratio})
        prev = err
    return rows

# }}}
