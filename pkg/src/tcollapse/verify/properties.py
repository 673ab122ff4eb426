"""
Randomised checks of the one-step operator: monotonicity, conservation,
L1 contraction, the total-variation bound and time continuity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from tcollapse.cauchy import tc_step_heterogeneous, tc_step_homogeneous
from tcollapse.characteristics import DEFAULT_BACKTRACE
from tcollapse.flux import FluxModel
from tcollapse.grid import GridSolution, SpatialGrid, tv
from tcollapse.kinetic import LambdaGrid


@dataclass(frozen=True)
class PropertyResult:
    """Worst violation of one property; ``tol`` None marks an informational entry."""

    name: str
    worst: float
    tol: Optional[float]

    @property
    def passed(self) -> bool:
        return self.tol is None or self.worst <= self.tol


def random_piecewise_constant(rng: np.random.Generator, N: int, a: float, b: float,
                              margin: int, pieces: int = 12) -> np.ndarray:
    """Random step function with values in [a, b], zero within ``margin`` cells of the edges."""
    cuts = np.sort(rng.choice(np.arange(margin + 1, N - margin), size=pieces - 1, replace=False))
    vals = rng.uniform(a, b, size=pieces)
    u = np.repeat(vals, np.diff(np.concatenate([[margin], cuts, [N - margin]])))
    return np.concatenate([np.zeros(margin), u, np.zeros(margin)])


def operator_property_suite(model: FluxModel, trials: int = 100, N: int = 200, M: int = 200,
                            dt: float = 0.01, lo: float = 0.0, hi: float = 1.0, seed: int = 0,
                            slack: float = 0.10, cfg=DEFAULT_BACKTRACE) -> list:
    """Worst violations over ``trials`` random states (and ordered pairs).

    Homogeneous models are checked at the exact tolerances (1e-12, 1e-10
    for the L1 contraction). For heterogeneous ones monotonicity keeps its
    tolerance, the TV check uses (1 + C1 dt) TV(u) + C2 dt with ``slack``,
    and conservation, L1 contraction and the max principle are reported
    without a tolerance: sampling the backtraced feet on the grid makes
    them hold only up to O(dx + dlambda) defects at the flux features.
    Time continuity compares ||T u - u||_1 with L TV(u) dt (plus slack).
    """
    rng = np.random.default_rng(seed)
    grid = SpatialGrid.uniform(lo, hi, N)
    lg = LambdaGrid(model.a, model.b, M)
    dx = grid.dx[0]
    margin = int(np.ceil(model.L * dt / dx)) + 4

    if model.heterogeneous:
        def step(u):
            return tc_step_heterogeneous(GridSolution(grid, 0.0, u), model, 0.0, dt, lg, cfg).u
    else:
        def step(u):
            return tc_step_homogeneous(GridSolution(grid, 0.0, u), model, dt, lg).u

    mono = cons = contr = tvd = cont = maxp = 0.0
    lo_v, hi_v = max(model.a, 0.0), model.b
    for _ in range(trials):
        u = random_piecewise_constant(rng, N, lo_v, hi_v, margin)
        bump = random_piecewise_constant(rng, N, 0.0, 1.0, margin)
        v = np.minimum(u + bump * (hi_v - u), hi_v)
        Tu, Tv = step(u), step(v)
        mono = max(mono, float(np.max(Tu - Tv)))
        scale = max(np.abs(u).sum() * dx, 1e-300)
        cons = max(cons, abs((Tu.sum() - u.sum()) * dx) / scale)
        contr = max(contr, float(np.abs(Tu - Tv).sum() * dx - np.abs(u - v).sum() * dx))
        tu = tv(u)
        if model.heterogeneous:
            bound = (1.0 + model.C1 * dt) * tu + model.C2 * dt
            tvd = max(tvd, tv(Tu) - (1.0 + slack) * bound)
        else:
            tvd = max(tvd, tv(Tu) - tu)
        cont = max(cont, float(np.abs(Tu - u).sum() * dx) - (1.0 + slack) * model.L * tu * dt)
        maxp = max(maxp, float(Tu.max() - u.max()), float(u.min() - Tu.min()))
    exact = not model.heterogeneous
    return [
        PropertyResult("monotonicity", mono, 1e-12),
        PropertyResult("conservation", cons, 1e-12 if exact else None),
        PropertyResult("l1_contraction", contr, 1e-10 if exact else None),
        PropertyResult("tv_bound", tvd, 1e-12),
        PropertyResult("time_continuity", cont, 1e-12),
        PropertyResult("max_principle", maxp, 1e-12 if exact else None),
    ]
