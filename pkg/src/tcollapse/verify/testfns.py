"""
Tensor-product hat test functions phi(t, x) = T(t) X(x) with exact
integrals over cells and time intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def hat(s, c: float, r: float):
    """1 - |s - c| / r on (c - r, c + r), exactly 0 outside."""
    s = np.asarray(s, dtype=float)
    inside = (s > c - r) & (s < c + r)
    return np.where(inside, np.maximum(0.0, 1.0 - np.abs(s - c) / r), 0.0)


def hat_primitive(s, c: float, r: float):
    """Integral of the hat from -inf to s."""
    s = np.asarray(s, dtype=float)
    left = (s - c + r) ** 2 / (2 * r)
    right = r - (c + r - s) ** 2 / (2 * r)
    return np.where(s <= c - r, 0.0, np.where(s <= c, left, np.where(s <= c + r, right, r)))


@dataclass(frozen=True)
class Hat:
    c: float
    r: float

    def __call__(self, s):
        return hat(s, self.c, self.r)

    def integral(self, lo, hi):
        return hat_primitive(hi, self.c, self.r) - hat_primitive(lo, self.c, self.r)

    @property
    def kinks(self):
        return (self.c - self.r, self.c, self.c + self.r)


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class
    ident: str
    T: Hat
    X: Hat


@dataclass(frozen=True)
class TestFunctionBank:
    __test__ = False  # not a pytest class
    functions: tuple

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    @classmethod
    def lattice(cls, x_lo: float, x_hi: float, t_final: float, touch_boundary: bool = False):
        """5 x 5 lattice of (t, x) centres with two radii each (50 functions).

        Time centres are 0, T/5, ..., 4T/5 with radii T/10 and T/5, so every
        function vanishes at T (the first row also tests the initial term).
        Without ``touch_boundary`` the spatial supports lie strictly inside
        the interval; with it the centres include both edges.
        """
        W = x_hi - x_lo
        T = t_final
        out = []
        if touch_boundary:
            radii = ((T / 10, W / 8), (T / 5, W / 4))
            xcs = [x_lo + W * i / 4 for i in range(5)]
        else:
            radii = ((T / 10, W / 12), (T / 5, W / 6))
            xcs = [x_lo + W * (i + 1) / 6 for i in range(5)]
        for size, (rt, rx) in enumerate(radii):
            for j in range(5):
                for i, xc in enumerate(xcs):
                    out.append(TestFunction(f"s{size}t{j}x{i}", Hat(T * j / 5, rt), Hat(xc, rx)))
        return cls(tuple(out))

    def split_unresolved(self, features, length_scale, dx: float):
        """Split off functions whose spatial support straddles an unresolved flux feature.

        A feature of width ``length_scale`` smaller than ``dx`` is a jump at
        grid scale; residuals of test functions across it measure the
        O(1) interface error of one cell rather than the entropy defect.
        Returns (kept, excluded) banks; nothing is excluded when the
        feature is resolved (or absent).
        """
        if length_scale is None or length_scale >= dx or not features:
            return self, TestFunctionBank(())
        kept, excluded = [], []
        for fn in self.functions:
            lo, hi = fn.X.c - fn.X.r, fn.X.c + fn.X.r
            hit = any(lo - length_scale < c < hi + length_scale for c in features)
            (excluded if hit else kept).append(fn)
        return TestFunctionBank(tuple(kept)), TestFunctionBank(tuple(excluded))


def k_grid(a: float, b: float, count: int = 21) -> np.ndarray:
    return np.linspace(a, b, count)
