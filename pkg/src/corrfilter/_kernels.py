"""Kernel backend selection.

The compiled extension is used when importable; setting the environment
variable ``CORRFILTER_PURE_PYTHON=1`` forces the pure-Python fallback.
"""
import os

from . import _pycore

if os.environ.get("CORRFILTER_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pycore
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        _impl = _pycore

BACKEND = _impl.BACKEND
lr_is_planar = _impl.lr_is_planar
pmfg_greedy = _impl.pmfg_greedy
pam_swap = _impl.pam_swap


def backends():
    """Mapping of available backend name -> kernel module."""
    out = {"python": _pycore}
    try:
        from . import _core

        out["cython"] = _core
    except ImportError:
        pass
    return out
