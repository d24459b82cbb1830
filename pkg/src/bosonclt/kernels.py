"""Backend selection for the occupation-basis kernels.

The compiled extension is used when it imports; set ``BOSONCLT_PURE=1`` to
force the pure-Python fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("BOSONCLT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

composition_table = _impl.composition_table
enumerate_sector = _impl.enumerate_sector
rank_states = _impl.rank_states
hop_structure = _impl.hop_structure
raise_structure = _impl.raise_structure
