"""Exact solutions and the Godunov reference solver (same objects as :mod:`tcollapse.oracles`)."""

import tcollapse.oracles as _impl

__all__ = [k for k in vars(_impl) if not k.startswith("_")]
globals().update({k: getattr(_impl, k) for k in __all__})
