"""Kernel dispatch: compiled Cython core when importable, numpy fallback otherwise.

Set ``QHARMONY_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels

try:
    if os.environ.get("QHARMONY_PURE"):
        raise ImportError("pure-Python kernels requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_impl = _compiled or _pykernels
BACKEND = "cython" if _compiled is not None else "python"

jacobi_eigh = _impl.jacobi_eigh
coupling_matrix = _impl.coupling_matrix


def backends():
    """Every importable backend, keyed by name."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
