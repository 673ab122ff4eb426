"""Transport-collapse scheme for initial-boundary value problems (same objects as :mod:`tcollapse.ibvp`)."""

import tcollapse.ibvp as _impl

__all__ = [k for k in vars(_impl) if not k.startswith("_")]
globals().update({k: getattr(_impl, k) for k in __all__})
