"""
Reference solutions: exact Burgers Riemann problems, exact linear
advection and a first-order Godunov finite-volume solver.
"""

from __future__ import annotations

import math

import numpy as np

from tcollapse.errors import UnsupportedFluxError
from tcollapse.flux import FluxModel, eval_flux, eval_flux_deriv
from tcollapse.grid import GridSolution, _pad


def burgers_riemann_exact(u_l: float, u_r: float, t: float, x):
    """Entropy solution of u_t + (u^2/2)_x = 0 with a jump at x = 0."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if u_l > u_r:
        s = 0.5 * (u_l + u_r)
        return np.where(x < s * t, u_l, u_r)
    return np.clip(x / t, u_l, u_r)


def advection_exact(u0, c: float, t: float, x):
    return u0(np.asarray(x, dtype=float) - c * t)


def _shape(model: FluxModel, n: int = 513) -> str:
    """'convex', 'concave' or 'linear', judged from samples of f'."""
    lam = np.linspace(model.a, model.b, n)
    d = np.diff(np.asarray(eval_flux_deriv(model, 0.0, 0.0, lam), dtype=float))
    tol = 1e-12 * max(1.0, float(np.abs(d).max(initial=0.0)))
    if np.all(np.abs(d) <= tol):
        return "linear"
    if np.all(d >= -tol):
        return "convex"
    if np.all(d <= tol):
        return "concave"
    raise UnsupportedFluxError(f"flux {model.name!r} is neither convex nor concave on [a, b]")


def _critical_point(model: FluxModel):
    """Zero of f' in [a, b] by bisection, or None if f' keeps its sign."""
    fp = lambda l: float(eval_flux_deriv(model, 0.0, 0.0, l))
    lo, hi = model.a, model.b
    flo, fhi = fp(lo), fp(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = fp(mid)
        if fm == 0 or hi - lo < 1e-15:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def godunov_flux(model: FluxModel, ul: np.ndarray, ur: np.ndarray, shape: str, crit):
    """Exact Riemann flux: min of f over [ul, ur] if ul <= ur, else max over [ur, ul]."""
    f = lambda u: np.asarray(eval_flux(model, 0.0, 0.0, u), dtype=float)
    fl, fr = f(ul), f(ur)
    rising = ul <= ur
    out = np.where(rising, np.minimum(fl, fr), np.maximum(fl, fr))
    if crit is not None:
        fc = float(f(crit))
        inside = (np.minimum(ul, ur) <= crit) & (crit <= np.maximum(ul, ur))
        if shape == "convex":
            # interior minimum matters only for rising pairs
            out = np.where(inside & rising, np.minimum(out, fc), out)
        elif shape == "concave":
            out = np.where(inside & ~rising, np.maximum(out, fc), out)
    return out


def godunov_solve(model: FluxModel, u0: GridSolution, t_final: float, cfl: float = 0.9,
                  closure: str = "extend") -> GridSolution:
    """First-order Godunov scheme on a 1D grid, with uniform steps at the given CFL."""
    if model.heterogeneous or model.dim != 1:
        raise UnsupportedFluxError("godunov_solve supports homogeneous 1D fluxes only")
    if not 0 < cfl <= 0.9:
        raise ValueError("cfl must lie in (0, 0.9]")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    shape = _shape(model)
    crit = _critical_point(model) if shape != "linear" else None
    dx = u0.grid.dx[0]
    L = max(model.L, 1e-300)
    steps = max(1, math.ceil(t_final * L / (cfl * dx) - 1e-12)) if t_final > 0 else 0
    u = u0.u.copy()
    for _ in range(steps):
        dt = t_final / steps
        p = _pad(u, 1, closure, 0)
        F = godunov_flux(model, p[:-1], p[1:], shape, crit)
        u = u - dt / dx * (F[1:] - F[:-1])
    return GridSolution(u0.grid, u0.t + t_final, u)
