"""Backend selection for the matrix-free Hamiltonian apply.

The compiled extension is preferred; set ``VARQED_PURE_PYTHON=1`` to force
the numpy fallback.  ``BACKEND`` names the one in use.
"""
import os

from . import _apply_py

try:
    if os.environ.get("VARQED_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _apply_ext
except ImportError:
    _apply_ext = None

BACKEND = "cython" if _apply_ext is not None else "numpy"

BACKENDS = {"numpy": _apply_py.apply_hamiltonian}
if _apply_ext is not None:
    BACKENDS["cython"] = _apply_ext.apply_hamiltonian

apply_hamiltonian = BACKENDS[BACKEND]
