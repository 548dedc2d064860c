"""Backend selection for the bootstrap replicate kernel.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``CIFABC_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the NumPy fallback is used.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("CIFABC_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_py:
        raise ImportError
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def replicate_functionals(P1, Q1, idx1, f1, P2, Q2, idx2, f2, widths):
    return _impl.replicate_functionals(P1, Q1, idx1, f1, P2, Q2, idx2, f2, widths)


def compiled_available() -> bool:
    return _compiled is not None
