"""
Kinetic function chi(lambda, u) and its lambda-cell discretisation.

The kinetic profile of a value u stores, per lambda cell, the exact
integral of chi(., u) over that cell, so that summing the masses (the
collapse) gives back u. Grids whose range excludes 0 measure chi from
the nearest range endpoint instead (the origin), i.e. they store the
profile of u - origin and add the origin back on collapse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from tcollapse.errors import RangeError


@dataclass(frozen=True)
class LambdaGrid:
    lo: float
    hi: float
    M: int

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"lambda grid needs M >= 2 cells, got {self.M}")
        if not self.hi > self.lo:
            raise ValueError("lambda grid needs hi > lo")

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.M

    @cached_property
    def edges(self) -> np.ndarray:
        e = self.lo + self.width * np.arange(self.M + 1)
        e[-1] = self.hi
        return e

    @property
    def origin(self) -> float:
        return float(min(max(0.0, self.lo), self.hi))

    @cached_property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class KineticProfile:
    grid: LambdaGrid
    masses: np.ndarray


def chi(lam, u):
    """1 on 0 <= lambda <= u, -1 on u <= lambda <= 0, 0 elsewhere."""
    lam = np.asarray(lam, dtype=float)
    u = np.asarray(u, dtype=float)
    pos = (lam >= 0) & (lam <= u) & (u > 0)
    neg = (lam <= 0) & (lam >= u) & (u < 0)
    out = pos.astype(np.int64) - neg.astype(np.int64)
    return out if out.ndim else int(out)


def chi_cell_mass(lam_lo, lam_hi, u):
    """Exact integral of chi(., u) over [lam_lo, lam_hi] (vectorised)."""
    lam_lo = np.asarray(lam_lo, dtype=float)
    lam_hi = np.asarray(lam_hi, dtype=float)
    u = np.asarray(u, dtype=float)
    w = lam_hi - lam_lo
    pos = np.clip(np.minimum(u, lam_hi) - np.maximum(0.0, lam_lo), 0.0, w)
    neg = np.clip(np.minimum(0.0, lam_hi) - np.maximum(u, lam_lo), 0.0, w)
    out = np.where(u >= 0, pos, -neg)
    return out if out.ndim else float(out)


def cell_masses(u, grid: LambdaGrid) -> np.ndarray:
    """Masses for an array of values; result has shape (M,) + u.shape."""
    u = np.asarray(u, dtype=float)
    o = grid.origin
    e = grid.edges.reshape((-1,) + (1,) * u.ndim) - o
    return chi_cell_mass(e[:-1], e[1:], u[None] - o)


def lift(u: float, grid: LambdaGrid) -> KineticProfile:
    if not grid.lo <= u <= grid.hi:
        raise RangeError(f"value {u} outside lambda range [{grid.lo}, {grid.hi}]")
    return KineticProfile(grid, cell_masses(u, grid))


def collapse(profile) -> float:
    """Sum the masses exactly (order independent) and add the grid origin."""
    if isinstance(profile, KineticProfile):
        masses, origin = profile.masses, profile.grid.origin
    else:
        masses, origin = np.asarray(profile), 0.0
    return math.fsum(np.append(masses, origin))


def collapse_field(masses: np.ndarray, origin: float = 0.0) -> np.ndarray:
    """Collapse a (M, ...) mass field along its leading axis, ascending j."""
    out = np.full(masses.shape[1:], float(origin))
    for row in masses:
        out += row
    return out
