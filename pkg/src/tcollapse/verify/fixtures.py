"""
Known inadmissible series used to check that the residual detectors fire.
"""

from __future__ import annotations

import numpy as np

from tcollapse.grid import Series, SpatialGrid


def riemann_jump_series(u_l: float, u_r: float, speed: float, lo: float, hi: float, N: int,
                        n: int, t_final: float, x0: float = 0.0) -> Series:
    """Cell averages of a single jump from u_l to u_r travelling at ``speed``.

    The jump position is sampled at every time level; no scheme is
    involved, so any (u_l, u_r, speed) can be injected.
    """
    grid = SpatialGrid.uniform(lo, hi, N)
    faces = grid.faces()
    times = np.linspace(0.0, t_final, n + 1)
    states = np.empty((n + 1, N))
    for k, t in enumerate(times):
        s = x0 + speed * t
        # fraction of each cell left of the jump
        frac = np.clip((s - faces[:-1]) / (faces[1:] - faces[:-1]), 0.0, 1.0)
        states[k] = u_l * frac + u_r * (1.0 - frac)
    return Series(grid, times, states, meta={"dt": t_final / n, "n": n, "M": N, "alpha": True})


def burgers_expansion_shock(N: int = 400, n: int = 100, t_final: float = 0.5,
                            lo: float = -1.0, hi: float = 1.0) -> Series:
    """The non-entropy weak solution of Burgers for u_l = 0, u_r = 1.

    It satisfies the Rankine-Hugoniot condition (speed 1/2) but violates
    the Kruzhkov inequalities, which single out the rarefaction fan.
    """
    return riemann_jump_series(0.0, 1.0, 0.5, lo, hi, N, n, t_final)
