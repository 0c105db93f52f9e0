"""Spatial fixpoint kernels with a compiled core and a NumPy fallback.

The Cython extension is preferred when importable; set the environment
variable ``STVERIFY_KERNELS=numpy`` (or ``cython``) to force a backend.
``BACKEND`` names the one in use.
"""

import os

from . import _spatial_np

_requested = os.environ.get("STVERIFY_KERNELS", "").lower()

if _requested not in ("", "cython", "numpy"):
    raise ValueError(f"STVERIFY_KERNELS must be 'cython' or 'numpy', "
                     f"got {_requested!r}")

if _requested == "numpy":
    _impl = _spatial_np
    BACKEND = "numpy"
else:
    try:
        from . import _spatial_cy as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _spatial_np
        BACKEND = "numpy"

reach_fixpoint = _impl.reach_fixpoint
escape_fixpoint = _impl.escape_fixpoint


def available_backends():
    """Names of importable kernel backends ('numpy' is always present)."""
    out = ["numpy"]
    try:
        from . import _spatial_cy  # noqa: F401
        out.append("cython")
    except ImportError:
        pass
    return out


def get_backend(name):
    """Kernel module for an explicit backend name (for tests/benchmarks)."""
    if name == "numpy":
        return _spatial_np
    if name == "cython":
        from . import _spatial_cy
        return _spatial_cy
    raise ValueError(f"unknown kernel backend {name!r}")
