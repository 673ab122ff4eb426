"""
Flux models f(t, x, lambda) for scalar conservation laws

    du/dt + div_x f(t, x, u) = 0

A :class:`FluxModel` bundles vectorised evaluators for the flux, its
lambda-derivative, its x-divergence and the x-gradient of the
lambda-derivative, together with the admissible value range [a, b] and
the constants used by the stability bounds of the transport-collapse
operator.

Conventions: in 1D, ``x`` is any array and evaluators return arrays of
the broadcast shape. In 2D, ``x`` has a leading axis of length 2 and
vector-valued evaluators return arrays with the same leading axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from tcollapse.errors import InputDomainError, UnknownFluxError

Evaluator = Callable[[float, np.ndarray, np.ndarray], np.ndarray]

# lattice size per axis used when sampling the sup-norms behind C1, C2
CONSTANTS_LATTICE = 64


@dataclass(frozen=True)
class FluxModel:
    name: str
    dim: int
    flux: Evaluator
    fprime: Optional[Evaluator] = None
    div_x: Optional[Evaluator] = None
    grad_x_fprime: Optional[Evaluator] = None
    a: float = 0.0
    b: float = 1.0
    L: float = 1.0
    C1: float = 0.0
    C2: float = 0.0
    heterogeneous: bool = False
    time_dependent: bool = False
    max_principle: bool = False
    # width of the thinnest spatial feature of the flux (None if smooth at O(1))
    length_scale: Optional[float] = None
    # centres of such features, used to place extra sampling points
    features: tuple = ()
    region: tuple = (-math.inf, math.inf)
    x_scale: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dim}")
        if not self.b >= self.a:
            raise ValueError(f"need a <= b, got a={self.a}, b={self.b}")


def _check_finite(*args):
    for arg in args:
        if not np.all(np.isfinite(arg)):
            raise InputDomainError("non-finite input to flux evaluator")


def _zeros_like_x(model, x, lam):
    lam = np.asarray(lam, dtype=float)
    if model.dim == 1:
        return np.zeros(np.broadcast(np.asarray(x, dtype=float), lam).shape)
    x = np.asarray(x, dtype=float)
    return np.zeros(np.broadcast(x[0], lam).shape)


def eval_flux(model: FluxModel, t, x, lam):
    _check_finite(t, x, lam)
    return model.flux(t, np.asarray(x, dtype=float), np.asarray(lam, dtype=float))


def eval_flux_deriv(model: FluxModel, t, x, lam):
    """Return f'_lambda, falling back to a central difference in lambda."""
    _check_finite(t, x, lam)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if model.fprime is not None:
        return model.fprime(t, x, lam)
    h = 1e-6 * (model.b - model.a if model.b > model.a else 1.0)
    return (model.flux(t, x, lam + h) - model.flux(t, x, lam - h)) / (2 * h)


def eval_div_x_flux(model: FluxModel, t, x, lam):
    """Return sum_j d/dx_j f_j(t, x, lambda); exactly zero for homogeneous models."""
    _check_finite(t, x, lam)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if not model.heterogeneous:
        return _zeros_like_x(model, x, lam)
    if model.div_x is not None:
        return model.div_x(t, x, lam)
    h = 1e-6 * model.x_scale
    if model.dim == 1:
        return (model.flux(t, x + h, lam) - model.flux(t, x - h, lam)) / (2 * h)
    out = 0.0
    for j in range(2):
        e = np.zeros((2,) + (1,) * (x.ndim - 1))
        e[j] = h
        out = out + (model.flux(t, x + e, lam)[j] - model.flux(t, x - e, lam)[j]) / (2 * h)
    return out


def eval_grad_x_fprime(model: FluxModel, t, x, lam):
    """x-gradient of f'_lambda; shape (...) in 1D, (2, 2, ...) in 2D."""
    _check_finite(t, x, lam)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if not model.heterogeneous:
        z = _zeros_like_x(model, x, lam)
        return z if model.dim == 1 else np.zeros((2, 2) + z.shape)
    if model.grad_x_fprime is not None:
        return model.grad_x_fprime(t, x, lam)
    h = 1e-6 * model.x_scale
    if model.dim == 1:
        return (eval_flux_deriv(model, t, x + h, lam) - eval_flux_deriv(model, t, x - h, lam)) / (2 * h)
    rows = []
    for j in range(2):
        e = np.zeros((2,) + (1,) * (x.ndim - 1))
        e[j] = h
        rows.append((eval_flux_deriv(model, t, x + e, lam) - eval_flux_deriv(model, t, x - e, lam)) / (2 * h))
    # [k, j] = d f'_k / d x_j
    return np.stack(rows, axis=1)


def eval_grad_x_div(model: FluxModel, t, x, lam):
    """x-gradient of div_x f by central differences of the divergence."""
    x = np.asarray(x, dtype=float)
    if not model.heterogeneous:
        z = _zeros_like_x(model, x, lam)
        return z if model.dim == 1 else np.zeros((2,) + z.shape)
    h = 1e-6 * model.x_scale
    if model.length_scale is not None:
        h = min(h, 1e-3 * model.length_scale)
    if model.dim == 1:
        return (eval_div_x_flux(model, t, x + h, lam) - eval_div_x_flux(model, t, x - h, lam)) / (2 * h)
    comps = []
    for j in range(2):
        e = np.zeros((2,) + (1,) * (x.ndim - 1))
        e[j] = h
        comps.append((eval_div_x_flux(model, t, x + e, lam) - eval_div_x_flux(model, t, x - e, lam)) / (2 * h))
    return np.stack(comps)


# {{{ sampling of bounds

def sample_axis(model: FluxModel, lo: float, hi: float, n: int = CONSTANTS_LATTICE):
    """Uniform lattice on [lo, hi], refined around the model's thin features."""
    pts = [np.linspace(lo, hi, n)]
    if model.length_scale is not None:
        for c in model.features:
            pts.append(np.linspace(c - 2 * model.length_scale, c + 2 * model.length_scale, n))
    return np.unique(np.concatenate(pts))


def estimate_constants(model: FluxModel, x_range=(-1.0, 1.0), t_range=(0.0, 1.0)):
    """Sampled (C1, C2): sup |grad_x f'_lambda| and 4 sup |grad_x div_x f|."""
    if not model.heterogeneous:
        return 0.0, 0.0
    n = CONSTANTS_LATTICE
    ts = np.linspace(t_range[0], t_range[1], n if model.time_dependent else 1)
    lams = np.linspace(model.a, model.b, n)
    xs = sample_axis(model, *x_range)
    c1 = c2 = 0.0
    for t in ts:
        if model.dim == 1:
            X, LAM = np.meshgrid(xs, lams, indexing="ij")
        else:
            xs2 = np.linspace(x_range[0], x_range[1], n)
            X0, X1, LAM = np.meshgrid(xs2, xs2, lams, indexing="ij")
            X = np.stack([X0, X1])
        g = np.abs(eval_grad_x_fprime(model, t, X, LAM))
        d = np.abs(eval_grad_x_div(model, t, X, LAM))
        c1 = max(c1, float(g.max()))
        c2 = max(c2, float(d.max()))
    return c1, 4.0 * c2


def speed_bound(model: FluxModel, x_range=(-1.0, 1.0)):
    """Sampled sup |f'_lambda| over [a, b] and the given x range."""
    lams = np.linspace(model.a, model.b, 257)
    if model.dim == 1:
        xs = sample_axis(model, *x_range)
        X, LAM = np.meshgrid(xs, lams, indexing="ij")
        return float(np.abs(eval_flux_deriv(model, 0.0, X, LAM)).max())
    xs = np.linspace(x_range[0], x_range[1], 33)
    X0, X1, LAM = np.meshgrid(xs, xs, lams, indexing="ij")
    return float(np.abs(eval_flux_deriv(model, 0.0, np.stack([X0, X1]), LAM)).max())

# }}}


# {{{ regularised Heaviside

@dataclass(frozen=True)
class HeavisideReg:
    """C^1 piecewise-cubic smoothstep on [-eps, eps]."""

    eps: float = 1e-4

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def _s(self, x):
        return np.clip((np.asarray(x, dtype=float) + self.eps) / (2 * self.eps), 0.0, 1.0)

    def __call__(self, x):
        s = self._s(x)
        return s * s * (3.0 - 2.0 * s)

    def deriv(self, x):
        s = self._s(x)
        return 6.0 * s * (1.0 - s) / (2 * self.eps)

    def deriv2(self, x):
        x = np.asarray(x, dtype=float)
        s = self._s(x)
        inside = np.abs(x) < self.eps
        return np.where(inside, 6.0 * (1.0 - 2.0 * s) / (2 * self.eps) ** 2, 0.0)

# }}}


# {{{ built-in models

def burgers(a: float = 0.0, b: float = 1.0) -> FluxModel:
    return FluxModel(
        name="burgers", dim=1,
        flux=lambda t, x, lam: 0.5 * lam * lam + 0.0 * x,
        fprime=lambda t, x, lam: lam + 0.0 * x,
        a=a, b=b, L=max(abs(a), abs(b)), params={"a": a, "b": b})


def advection(c: float = 1.0, a: float = 0.0, b: float = 1.0) -> FluxModel:
    return FluxModel(
        name="advection", dim=1,
        flux=lambda t, x, lam: c * lam + 0.0 * x,
        fprime=lambda t, x, lam: c + 0.0 * (lam + x),
        a=a, b=b, L=abs(c), params={"c": c, "a": a, "b": b})


def concave_traffic(a: float = 0.0, b: float = 1.0) -> FluxModel:
    """Greenshields flux lambda (1 - lambda); zeros at 0 and 1."""
    L = max(abs(1 - 2 * a), abs(1 - 2 * b))
    return FluxModel(
        name="concave_traffic", dim=1,
        flux=lambda t, x, lam: lam * (1.0 - lam) + 0.0 * x,
        fprime=lambda t, x, lam: 1.0 - 2.0 * lam + 0.0 * x,
        a=a, b=b, L=L, max_principle=(a == 0.0 and b == 1.0),
        params={"a": a, "b": b})


def paper_ibvp(eps: float = 1e-4) -> FluxModel:
    """f(x, u) = (H(x) + 4 H(-x)) (1 - u)(1 + u) with a smoothstep H of width eps.

    For the symmetric smoothstep H(-x) = 1 - H(x), so the spatial factor is
    g(x) = 4 - 3 H(x), ranging over [1, 4].
    """
    H = HeavisideReg(eps)

    def g(x):
        return 4.0 - 3.0 * H(x)

    def dg(x):
        return -3.0 * H.deriv(x)

    model = FluxModel(
        name="paper_ibvp", dim=1,
        flux=lambda t, x, lam: g(x) * (1.0 - lam) * (1.0 + lam),
        fprime=lambda t, x, lam: -2.0 * lam * g(x),
        div_x=lambda t, x, lam: dg(x) * (1.0 - lam * lam),
        grad_x_fprime=lambda t, x, lam: -2.0 * lam * dg(x),
        a=-1.0, b=1.0, L=8.0, heterogeneous=True, max_principle=True,
        length_scale=eps, features=(0.0,), x_scale=2.0,
        params={"eps": eps})
    c1, c2 = estimate_constants(model)
    return replace(model, C1=c1, C2=c2)


def burgers2d(a: float = 0.0, b: float = 1.0) -> FluxModel:
    """f(u) = (u^2/2, u^2/2)."""
    return FluxModel(
        name="burgers2d", dim=2,
        flux=lambda t, x, lam: np.stack([0.5 * lam * lam + 0.0 * x[0]] * 2),
        fprime=lambda t, x, lam: np.stack([lam + 0.0 * x[0]] * 2),
        a=a, b=b, L=max(abs(a), abs(b)), params={"a": a, "b": b})


def advection2d(cx: float = 1.0, cy: float = 0.0, a: float = 0.0, b: float = 1.0) -> FluxModel:
    return FluxModel(
        name="advection2d", dim=2,
        flux=lambda t, x, lam: np.stack([cx * lam + 0.0 * x[0], cy * lam + 0.0 * x[0]]),
        fprime=lambda t, x, lam: np.stack([cx + 0.0 * (lam + x[0]), cy + 0.0 * (lam + x[0])]),
        a=a, b=b, L=max(abs(cx), abs(cy)), params={"cx": cx, "cy": cy, "a": a, "b": b})


def rotating2d(omega: float = 1.0, a: float = 0.0, b: float = 1.0, radius: float = 1.0) -> FluxModel:
    """Solid-body rotation f = u (-omega y, omega x); heterogeneous but divergence-free."""

    def fp(t, x, lam):
        lam = np.asarray(lam, dtype=float)
        return np.stack([-omega * x[1] + 0.0 * lam, omega * x[0] + 0.0 * lam])

    def grad(t, x, lam):
        z = 0.0 * (x[0] + lam)
        return np.array([[z, z - omega], [z + omega, z]])

    return FluxModel(
        name="rotating2d", dim=2,
        flux=lambda t, x, lam: lam * fp(t, x, lam),
        fprime=fp,
        div_x=lambda t, x, lam: 0.0 * (x[0] + lam),
        grad_x_fprime=grad,
        a=a, b=b, L=abs(omega) * radius * math.sqrt(2), heterogeneous=True,
        params={"omega": omega, "a": a, "b": b})


def kinetic_normalization(model: FluxModel, origin: Optional[float] = None) -> FluxModel:
    """The flux f(t, x, lambda) - f(t, x, origin) that transport-collapse actually solves.

    The kinetic function measures u from ``origin`` (0 clamped to [a, b]),
    so the operator cannot see the x-dependence of f(t, x, origin). For
    homogeneous fluxes this is a constant shift and changes nothing; for
    fluxes with f(t, x, 0) varying in x (the paper_ibvp flux) it removes
    the source -div_x f(t, x, 0) from the law being solved.
    """
    if not model.heterogeneous:
        return model
    o = float(min(max(0.0, model.a), model.b)) if origin is None else float(origin)

    def flux(t, x, lam):
        return model.flux(t, x, lam) - model.flux(t, x, o + 0.0 * np.asarray(lam, dtype=float))

    def div_x(t, x, lam):
        lam = np.asarray(lam, dtype=float)
        return eval_div_x_flux(model, t, x, lam) - eval_div_x_flux(model, t, x, o + 0.0 * lam)

    return replace(model, name=f"{model.name}[normalized]", flux=flux,
                   fprime=lambda t, x, lam: eval_flux_deriv(model, t, x, lam),
                   div_x=div_x, params={**model.params, "origin": o})


_BUILTINS = {
    "burgers": burgers,
    "advection": advection,
    "concave_traffic": concave_traffic,
    "paper_ibvp": paper_ibvp,
    "burgers2d": burgers2d,
    "advection2d": advection2d,
    "rotating2d": rotating2d,
}


def builtin(name: str, **params) -> FluxModel:
    """Construct a built-in model by name, e.g. ``builtin("advection", c=1.0)``."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownFluxError(
            f"unknown flux {name!r}; known: {', '.join(sorted(_BUILTINS))}") from None
    if name == "paper_ibvp" and "eps" in params and not params["eps"] > 0:
        raise ValueError("paper_ibvp needs eps > 0")
    return factory(**params)


def builtin_names():
    return sorted(_BUILTINS)

# }}}
