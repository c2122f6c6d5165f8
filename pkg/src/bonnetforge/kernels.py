"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise the numpy
fallback is imported.  Set ``BONNETFORGE_BACKEND=python`` to force the
fallback (useful for benchmarking and for cross-checking the two).
"""
import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("BONNETFORGE_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

qmul = _impl.qmul
sandwich = _impl.sandwich
integrate_paths = _impl.integrate_paths
propagate_signs = _impl.propagate_signs


def backends():
    """Mapping of every importable backend name to its module."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
