"""
Uniform cell grids, cell-averaged solutions and the exact shift remap.

The remap moves a piecewise-constant field by an arbitrary distance s and
returns the exact cell averages of the shifted field. For a shift of
(k + theta) cells the new value of cell i is

    (1 - theta) * u[i - k] + theta * u[i - k - 1],

a convex combination, so the remap is monotone, conservative (away from
the edges) and total-variation diminishing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from tcollapse.errors import SupportOverflowError

CLOSURES = ("compact_support", "periodic", "extend", "zero")


@dataclass(frozen=True)
class SpatialGrid:
    lo: tuple
    hi: tuple
    N: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) != len(self.N):
            raise ValueError("inconsistent grid axes")
        if len(self.N) not in (1, 2):
            raise ValueError("grids are 1D or 2D")
        for lo, hi, n in zip(self.lo, self.hi, self.N):
            if n < 4:
                raise ValueError(f"need at least 4 cells per axis, got {n}")
            if not hi > lo:
                raise ValueError("need hi > lo on every axis")

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "SpatialGrid":
        return cls((float(lo),), (float(hi),), (int(n),))

    @classmethod
    def square(cls, lo: float, hi: float, n: int) -> "SpatialGrid":
        return cls((float(lo),) * 2, (float(hi),) * 2, (int(n),) * 2)

    @property
    def dim(self) -> int:
        return len(self.N)

    @property
    def dx(self) -> tuple:
        return tuple((hi - lo) / n for lo, hi, n in zip(self.lo, self.hi, self.N))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    def centers(self, axis: int = 0) -> np.ndarray:
        return self.lo[axis] + self.dx[axis] * (np.arange(self.N[axis]) + 0.5)

    def faces(self, axis: int = 0) -> np.ndarray:
        f = self.lo[axis] + self.dx[axis] * np.arange(self.N[axis] + 1)
        f[-1] = self.hi[axis]
        return f

    @property
    def x(self) -> np.ndarray:
        """Cell centres: shape (N,) in 1D, (2, Nx, Ny) in 2D."""
        if self.dim == 1:
            return self.centers()
        return np.stack(np.meshgrid(self.centers(0), self.centers(1), indexing="ij"))

    def cell_averages(self, func, quad: int = 8) -> np.ndarray:
        """Cell averages of ``func`` by Gauss-Legendre quadrature per cell (1D)."""
        if self.dim != 1:
            return func(self.x)
        nodes, weights = np.polynomial.legendre.leggauss(quad)
        f = self.faces()
        mid = 0.5 * (f[1:] + f[:-1])
        half = 0.5 * (f[1:] - f[:-1])
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        return 0.5 * (func(pts) * weights).sum(axis=1)


@dataclass
class GridSolution:
    grid: SpatialGrid
    t: float
    u: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != tuple(self.grid.N):
            raise ValueError(f"values of shape {self.u.shape} do not match grid {self.grid.N}")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("non-finite cell values")

    def mass(self) -> float:
        return float(self.u.sum() * self.grid.cell_volume)

    def copy(self, t: Optional[float] = None, u: Optional[np.ndarray] = None) -> "GridSolution":
        return GridSolution(self.grid, self.t if t is None else t,
                            self.u.copy() if u is None else u)


@dataclass
class Series:
    """Time levels of a run: ``states[k]`` holds the cell values at ``times[k]``."""

    grid: SpatialGrid
    times: np.ndarray
    states: np.ndarray
    # boundary values used during step k (IBVP runs only), shape (n, 2)
    boundary: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def solution(self, k: int) -> GridSolution:
        return GridSolution(self.grid, float(self.times[k]), self.states[k])

    def at(self, t: float) -> GridSolution:
        """Convex combination of the two time levels bracketing ``t``."""
        times = self.times
        if t <= times[0]:
            return self.solution(0)
        if t >= times[-1]:
            return self.solution(len(times) - 1)
        k = int(np.searchsorted(times, t, side="right") - 1)
        alpha = (t - times[k]) / (times[k + 1] - times[k])
        u = (1 - alpha) * self.states[k] + alpha * self.states[k + 1]
        return GridSolution(self.grid, float(t), u)


# {{{ remap

def tv(u: np.ndarray, closure: str = "compact_support") -> float:
    """Total variation of a 1D cell field (summed over axes in 2D)."""
    u = np.asarray(u, dtype=float)
    total = 0.0
    for axis in range(u.ndim):
        total += float(np.abs(np.diff(u, axis=axis)).sum())
        if closure == "compact_support":
            total += float(np.abs(np.take(u, 0, axis=axis)).sum()
                           + np.abs(np.take(u, -1, axis=axis)).sum())
        elif closure == "periodic":
            total += float(np.abs(np.take(u, 0, axis=axis) - np.take(u, -1, axis=axis)).sum())
    return total


def _pad(rows: np.ndarray, P: int, closure: str, axis: int) -> np.ndarray:
    pad = [(0, 0)] * rows.ndim
    pad[axis] = (P, P)
    if closure in ("compact_support", "zero"):
        return np.pad(rows, pad)
    if closure == "periodic":
        return np.pad(rows, pad, mode="wrap")
    if closure == "extend":
        return np.pad(rows, pad, mode="edge")
    raise ValueError(f"unknown closure {closure!r}; expected one of {CLOSURES}")


def check_support(u: np.ndarray, shift_cells: int, closure: str):
    """Raise if compactly supported data lies within ``shift_cells`` of an edge."""
    if closure != "compact_support":
        return
    k = shift_cells + 1
    for axis in range(u.ndim):
        n = u.shape[axis]
        k_ax = min(k, n)
        lo = np.take(u, np.arange(k_ax), axis=axis)
        hi = np.take(u, np.arange(n - k_ax, n), axis=axis)
        if np.any(lo != 0) or np.any(hi != 0):
            raise SupportOverflowError(
                f"support within {k} cells of a domain edge along axis {axis}; "
                "enlarge the padding or use another closure")


def shift_rows(rows: np.ndarray, shifts: np.ndarray, dx: float, closure: str,
               axis: int = 1) -> np.ndarray:
    """Exact cell averages of each row of ``rows`` shifted by ``shifts[j]``.

    ``rows`` has the lambda index on axis 0 and the shifted spatial axis
    at ``axis``; ``shifts`` has one entry per row.
    """
    shifts = np.asarray(shifts, dtype=float)
    q = shifts / dx
    k = np.floor(q)
    theta = q - k
    k = k.astype(np.int64)
    P = int(np.abs(k).max()) + 2 if k.size else 2
    padded = _pad(rows, P, closure, axis)
    n = rows.shape[axis]
    shape = [1] * rows.ndim
    shape[0] = rows.shape[0]
    kk = k.reshape(shape)
    th = theta.reshape(shape)
    ishape = [1] * rows.ndim
    ishape[axis] = n
    i = np.arange(n).reshape(ishape) + P
    idx0 = np.broadcast_to(i - kk, _bshape(rows.shape, axis, n))
    idx1 = idx0 - 1
    a = np.take_along_axis(padded, idx0, axis=axis)
    b = np.take_along_axis(padded, idx1, axis=axis)
    return (1.0 - th) * a + th * b


def _bshape(shape, axis, n):
    s = list(shape)
    s[axis] = n
    return tuple(s)


def axis_weights(y, lo: float, dx: float, n: int, closure: str, P: int = 2):
    """Indices into the P-padded axis and weights of the cell-window average at y.

    The window of one cell centred at y overlaps cells i0 and i1 = i0 + 1
    with weights 1 - theta and theta (linear interpolation between centres).
    """
    q = (np.asarray(y, dtype=float) - lo) / dx - 0.5
    k = np.floor(q)
    theta = q - k
    return _clip_index(k, P, n, closure), _clip_index(k + 1, P, n, closure), theta


def average_at(u: np.ndarray, grid: SpatialGrid, y, closure: str) -> np.ndarray:
    """Cell-sized window average of the piecewise-constant field centred at y.

    In 1D this is linear interpolation between cell centres; in 2D the
    tensor product of that. Values beyond the grid follow ``closure``.
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    P = 2
    if grid.dim == 1:
        i0, i1, t = axis_weights(y, grid.lo[0], grid.dx[0], u.shape[0], closure, P)
        padded = _pad(u, P, closure, 0)
        return (1 - t) * padded[i0] + t * padded[i1]
    i0, j0, t0 = axis_weights(y[0], grid.lo[0], grid.dx[0], u.shape[0], closure, P)
    i1, j1, t1 = axis_weights(y[1], grid.lo[1], grid.dx[1], u.shape[1], closure, P)
    padded = _pad(_pad(u, P, closure, 0), P, closure, 1)
    return ((1 - t0) * (1 - t1) * padded[i0, i1] + t0 * (1 - t1) * padded[j0, i1]
            + (1 - t0) * t1 * padded[i0, j1] + t0 * t1 * padded[j0, j1])


def phase_average_at(masses: np.ndarray, grid: SpatialGrid, lam_lo: float, dlam: float,
                     y, lam, closure: str) -> np.ndarray:
    """Window average of a (lambda, x) cell field at phase points (lam, y).

    ``masses`` has the lambda index on axis 0 and the spatial axes after
    it; beyond the lambda range the field is zero, in x it follows
    ``closure``. All weights are nonnegative, so the result is a monotone
    linear function of ``masses``.
    """
    P = 2
    M = masses.shape[0]
    l0, l1, tl = axis_weights(lam, lam_lo, dlam, M, "zero", P)
    padded = _pad(masses, P, "zero", 0)
    axes = []
    for d in range(grid.dim):
        padded = _pad(padded, P, closure, d + 1)
        yd = y if grid.dim == 1 else y[d]
        axes.append(axis_weights(yd, grid.lo[d], grid.dx[d], masses.shape[d + 1], closure, P))
    out = 0.0
    for lidx, lw in ((l0, 1 - tl), (l1, tl)):
        if grid.dim == 1:
            i0, i1, t = axes[0]
            out = out + lw * ((1 - t) * padded[lidx, i0] + t * padded[lidx, i1])
        else:
            (i0, j0, t0), (i1, j1, t1) = axes
            out = out + lw * ((1 - t0) * (1 - t1) * padded[lidx, i0, i1]
                              + t0 * (1 - t1) * padded[lidx, j0, i1]
                              + (1 - t0) * t1 * padded[lidx, i0, j1]
                              + t0 * t1 * padded[lidx, j0, j1])
    return out


def _clip_index(k, P, n, closure):
    k = np.asarray(k).astype(np.int64)
    if closure == "periodic":
        return np.mod(k, n) + P
    # everything beyond the pad behaves like the outermost ghost cell
    return np.clip(k + P, 0, n + 2 * P - 1)

# }}}
