"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the pure-Python
fallback is always available. Set VARIFOLD_LAB_FORCE_FALLBACK=1 to skip the
extension (useful for benchmarking and for debugging the reference path).
"""
import os

if os.environ.get("VARIFOLD_LAB_FORCE_FALLBACK") == "1":
    from . import pyfallback as _impl
else:
    try:
        from . import _clipcore as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pyfallback as _impl

BACKEND: str = _impl.BACKEND
ball_masses = _impl.ball_masses
disk_tri_area_2d = _impl.disk_tri_area_2d

__all__ = ["BACKEND", "ball_masses", "disk_tri_area_2d"]
