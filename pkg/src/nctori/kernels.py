"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise the numpy
reference implementation.  ``NCTORI_PURE=1`` forces the reference backend.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("NCTORI_PURE") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.BACKEND

rank_mod_p = _impl.rank_mod_p
wedge_search_chunk = _impl.wedge_search_chunk
check_pairs = _impl.check_pairs


def backends() -> dict:
    """All importable backends by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
