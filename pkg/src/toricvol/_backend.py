"""Backend selection for the divided-difference kernels.

The compiled extension is used when it was built; ``TORICVOL_PURE=1`` forces
the pure-Python reference implementation.
"""
import os

from . import _core_py

EXP = _core_py.EXP
INVPOWER = _core_py.INVPOWER
MONOMIAL = _core_py.MONOMIAL

if os.environ.get("TORICVOL_PURE", "") not in ("", "0"):
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _core_py
        BACKEND = "python"

divdiff = _impl.divdiff
simplex_moments = _impl.simplex_moments
