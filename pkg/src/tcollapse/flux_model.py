"""Flux models and built-in fluxes (same objects as :mod:`tcollapse.flux`)."""

import tcollapse.flux as _impl

__all__ = [k for k in vars(_impl) if not k.startswith("_")]
globals().update({k: getattr(_impl, k) for k in __all__})
