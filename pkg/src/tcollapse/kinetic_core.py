"""Kinetic function, lifting and collapse (same objects as :mod:`tcollapse.kinetic`)."""

import tcollapse.kinetic as _impl

__all__ = [k for k in vars(_impl) if not k.startswith("_")]
globals().update({k: getattr(_impl, k) for k in __all__})
