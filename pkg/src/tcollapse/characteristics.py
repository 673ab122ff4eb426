"""
Backtracing of kinetic characteristics

    dx/dt = f'_lambda(t, x, lambda),    dlambda/dt = -div_x f(t, x, lambda)

from an endpoint (t, x, lambda) back to time t - dt, giving the foot
(x0, lambda0). Homogeneous fluxes have straight characteristics with
constant lambda; heterogeneous ones are integrated with classical RK4
over a fixed number of uniform substeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tcollapse.errors import RegionExitError
from tcollapse.flux import (FluxModel, eval_div_x_flux, eval_flux_deriv,
                            eval_grad_x_fprime, eval_grad_x_div, sample_axis)


@dataclass(frozen=True)
class CharacteristicEndpoint:
    x0: np.ndarray
    lam0: np.ndarray


@dataclass(frozen=True)
class BacktraceConfig:
    substeps: int = 8
    integrator: str = "rk4"
    # cap on the substep length; None means dt / 8
    h_max: Optional[float] = None
    # substeps per model length scale crossed at the maximal speed (0 disables)
    resolve: float = 0.0

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.integrator != "rk4":
            raise ValueError(f"unsupported integrator {self.integrator!r}")
        if self.h_max is not None and not self.h_max > 0:
            raise ValueError("h_max must be positive")

    def substeps_for(self, model: FluxModel, dt: float) -> int:
        if dt <= 0:
            return 0
        h = self.h_max if self.h_max is not None else dt / 8
        if self.resolve > 0 and model.length_scale is not None and model.L > 0:
            h = min(h, model.length_scale / (self.resolve * model.L))
        return max(self.substeps, math.ceil(dt / h - 1e-9))


DEFAULT_BACKTRACE = BacktraceConfig()


def backtrace_homogeneous(fprime, x, lam, dt: float) -> CharacteristicEndpoint:
    """Foot of a straight characteristic: (x - f'(lambda) dt, lambda)."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    if dt == 0:
        return CharacteristicEndpoint(x.copy(), lam.copy())
    return CharacteristicEndpoint(x - np.asarray(fprime(lam)) * dt, lam.copy())


def _rhs(model, s, x, lam):
    return eval_flux_deriv(model, s, x, lam), -eval_div_x_flux(model, s, x, lam)


def _check_region(model, x, s):
    lo, hi = model.region
    if math.isinf(lo) and math.isinf(hi):
        return
    if np.any(x < lo) or np.any(x > hi):
        raise RegionExitError(
            f"characteristic left the flux region [{lo}, {hi}] at t={s:.6g}", s)


def backtrace_heterogeneous(model: FluxModel, t, x, lam, dt,
                            cfg: BacktraceConfig = DEFAULT_BACKTRACE,
                            substeps: Optional[int] = None) -> CharacteristicEndpoint:
    """Integrate the characteristic system backwards from time t to t - dt.

    ``t`` and ``dt`` may be arrays broadcasting against the points; all
    points then take the same number of (differently sized) substeps.
    """
    dt_arr = np.asarray(dt, dtype=float)
    if np.any(dt_arr < 0):
        raise ValueError("dt must be non-negative")
    x = np.array(x, dtype=float)
    lam = np.array(lam, dtype=float)
    if model.dim == 1:
        x, lam = np.broadcast_arrays(x, lam)
    else:
        lam = np.broadcast_to(lam, np.broadcast(x[0], lam).shape)
        x = np.broadcast_to(x, (2,) + lam.shape)
    x = x.copy()
    lam = lam.copy()
    dt_max = float(dt_arr.max()) if dt_arr.size else 0.0
    if dt_max == 0:
        return CharacteristicEndpoint(x, lam)
    n = substeps if substeps is not None else cfg.substeps_for(model, dt_max)
    h = -dt_arr / n
    s = np.asarray(t, dtype=float)
    for _ in range(n):
        k1x, k1l = _rhs(model, s, x, lam)
        k2x, k2l = _rhs(model, s + h / 2, x + h / 2 * k1x, lam + h / 2 * k1l)
        k3x, k3l = _rhs(model, s + h / 2, x + h / 2 * k2x, lam + h / 2 * k2l)
        k4x, k4l = _rhs(model, s + h, x + h * k3x, lam + h * k3l)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        lam = lam + h / 6 * (k1l + 2 * k2l + 2 * k3l + k4l)
        s = s + h
        _check_region(model, x, s)
    return CharacteristicEndpoint(x, lam)


def forward_trace(model: FluxModel, t0: float, x0, lam0, dt: float, substeps: int):
    """Integrate forwards from (t0, x0, lam0) over dt; used for consistency checks."""
    x = np.array(x0, dtype=float)
    lam = np.array(lam0, dtype=float)
    h = dt / substeps
    s = t0
    for _ in range(substeps):
        k1x, k1l = _rhs(model, s, x, lam)
        k2x, k2l = _rhs(model, s + h / 2, x + h / 2 * k1x, lam + h / 2 * k1l)
        k3x, k3l = _rhs(model, s + h / 2, x + h / 2 * k2x, lam + h / 2 * k2l)
        k4x, k4l = _rhs(model, s + h, x + h * k3x, lam + h * k3l)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        lam = lam + h / 6 * (k1l + 2 * k2l + 2 * k3l + k4l)
        s = s + h
    return CharacteristicEndpoint(x, lam)


def backtrace(model: FluxModel, t: float, x, lam, dt: float,
              cfg: BacktraceConfig = DEFAULT_BACKTRACE) -> CharacteristicEndpoint:
    """Dispatch to the exact homogeneous path or the RK4 integrator."""
    if not model.heterogeneous:
        return backtrace_homogeneous(lambda l: eval_flux_deriv(model, t, x, l), x, lam, dt)
    return backtrace_heterogeneous(model, t, x, lam, dt, cfg)


def richardson_oracle(model: FluxModel, t: float, x, lam, dt: float,
                      substeps: int = 2 ** 12) -> CharacteristicEndpoint:
    """Fine-step RK4 result improved by one Richardson extrapolation (order 4)."""
    fine = backtrace_heterogeneous(model, t, x, lam, dt, substeps=substeps)
    coarse = backtrace_heterogeneous(model, t, x, lam, dt, substeps=substeps // 2)
    return CharacteristicEndpoint(fine.x0 + (fine.x0 - coarse.x0) / 15,
                                  fine.lam0 + (fine.lam0 - coarse.lam0) / 15)


def jacobian_defect(model: FluxModel, samples, cfg: BacktraceConfig = DEFAULT_BACKTRACE,
                    scale: Optional[float] = None) -> float:
    """Max |det d(x, lambda)/d(x0, lambda0) - 1| over samples (t, x, lambda, dt), 1D.

    The Jacobian of the backtrace map is estimated by forward differences
    of the displacements (x0 - x, lambda0 - lambda) with perturbation
    1e-5 * scale; its inverse determinant is compared with 1.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError("samples must be a non-empty (K, 4) array")
    if scale is None:
        scale = model.length_scale if model.length_scale is not None else model.x_scale
    d = 1e-5 * scale
    t, x, lam, dt = (samples[:, i:i + 1] for i in range(4))
    X = np.hstack([x, x + d, x])
    LAM = np.hstack([lam, lam, lam + d])
    if model.heterogeneous:
        ep = backtrace_heterogeneous(model, t, X, LAM, dt, cfg)
        sx = ep.x0 - X
        sl = ep.lam0 - LAM
    else:
        sx = -np.asarray(eval_flux_deriv(model, 0.0, X, LAM), dtype=float) * dt
        sl = np.zeros_like(LAM)
    # differentiate the displacements (small numbers, small rounding) and
    # add the identity; divide by the steps actually taken in floating point
    hx = X[:, 1] - X[:, 0]
    hl = LAM[:, 2] - LAM[:, 0]
    j11 = 1.0 + (sx[:, 1] - sx[:, 0]) / hx
    j12 = (sx[:, 2] - sx[:, 0]) / hl
    j21 = (sl[:, 1] - sl[:, 0]) / hx
    j22 = 1.0 + (sl[:, 2] - sl[:, 0]) / hl
    det = j11 * j22 - j12 * j21
    return float(np.max(np.abs(1.0 / det - 1.0)))


def continuity_moduli(model: FluxModel, t: float, dt: float, probes,
                      cfg: BacktraceConfig = DEFAULT_BACKTRACE):
    """Empirical Lipschitz ratios of x0 and lambda0 in x, with their bounds.

    ``probes`` is an iterable of (x, dx, lambda). Returns
    ``(rx, rlam, bound_x, bound_lam)`` where the bounds are
    1 + dt * sup|grad_x f'| and dt * sup|grad_x div_x f| from sampled norms.
    """
    probes = np.asarray(probes, dtype=float)
    x, dxs, lam = probes.T
    a = backtrace(model, t, x, lam, dt, cfg)
    b = backtrace(model, t, x + dxs, lam, dt, cfg)
    rx = float(np.max(np.abs(b.x0 - a.x0) / np.abs(dxs)))
    rl = float(np.max(np.abs(b.lam0 - a.lam0) / np.abs(dxs)))
    lo = float(min(x.min(), (x + dxs).min())) - model.L * dt
    hi = float(max(x.max(), (x + dxs).max())) + model.L * dt
    gx, gd = sampled_norms(model, t - dt, t, lo, hi)
    return rx, rl, 1.0 + dt * gx, dt * gd


def sampled_norms(model: FluxModel, t0: float, t1: float, lo: float, hi: float, n: int = 64):
    """Sampled sup over [t0, t1] x [lo, hi] x [a, b] of |grad_x f'| and |grad_x div f|."""
    if not model.heterogeneous:
        return 0.0, 0.0
    xs = sample_axis(model, lo, hi, n)
    lams = np.linspace(model.a, model.b, n)
    ts = np.linspace(t0, t1, n if model.time_dependent else 1)
    X, LAM = np.meshgrid(xs, lams, indexing="ij")
    gx = gd = 0.0
    for s in ts:
        gx = max(gx, float(np.abs(eval_grad_x_fprime(model, s, X, LAM)).max()))
        gd = max(gd, float(np.abs(eval_grad_x_div(model, s, X, LAM)).max()))
    return gx, gd


def oracle_error(model: FluxModel, samples, cfg: BacktraceConfig = DEFAULT_BACKTRACE,
                 substeps: Optional[int] = None) -> float:
    """Max |backtrace - richardson_oracle| (in x and lambda) over samples (t, x, lambda, dt)."""
    samples = np.asarray(samples, dtype=float)
    t, x, lam, dt = samples.T
    ep = backtrace_heterogeneous(model, t, x, lam, dt, cfg, substeps=substeps)
    ref = richardson_oracle(model, t, x, lam, dt)
    return float(max(np.max(np.abs(ep.x0 - ref.x0)), np.max(np.abs(ep.lam0 - ref.lam0))))


def rk4_order_ratio(model: FluxModel, samples, substeps: int = 4) -> float:
    """err(substeps) / err(2 substeps) against the oracle; close to 16 for a fourth-order method."""
    coarse = oracle_error(model, samples, substeps=substeps)
    fine = oracle_error(model, samples, substeps=2 * substeps)
    return coarse / fine if fine > 0 else float("inf")


def sample_points(rng: np.random.Generator, count: int, t_range=(0.0, 0.5), x_range=(-1.0, 1.0),
                  lam_range=(-1.0, 1.0), dt_range=(0.0, 0.05)) -> np.ndarray:
    """Uniform random (t, x, lambda, dt) samples, shape (count, 4)."""
    cols = [rng.uniform(lo, hi, count) for lo, hi in (t_range, x_range, lam_range, dt_range)]
    return np.column_stack(cols)
