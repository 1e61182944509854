"""Kernel dispatch: the compiled extension when available, else pure Python.

Set ``LIFTCORR_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("LIFTCORR_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

enumerate_pseudometric_tables = _impl.enumerate_pseudometric_tables
enumerate_morphism_tables = _impl.enumerate_morphism_tables
is_pseudometric_table = _impl.is_pseudometric_table


def backends():
    """All importable implementations, keyed by name (used by tests and benchmarks)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        return out
    out["cython"] = compiled
    return out
