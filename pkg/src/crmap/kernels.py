"""Backend selection for the hot kernels.

The compiled extension is used when it was built; setting
``CRMAP_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _pykernels

if os.environ.get("CRMAP_PURE_PYTHON", "") not in ("", "0"):
    _backend = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _backend

        BACKEND = "cython"
    except ImportError:
        _backend = _pykernels
        BACKEND = "python"

OK = _pykernels.OK
SKIPPED = _pykernels.SKIPPED
DEGENERATE = _pykernels.DEGENERATE

trace = _backend.trace
crm_cone_update = _backend.crm_cone_update
ism_cone_update = _backend.ism_cone_update


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
