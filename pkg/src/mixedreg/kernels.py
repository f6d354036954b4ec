"""Hot-loop kernels with backend selection at import time.

The compiled ``mixedreg._core`` extension is used when it imports;
otherwise, or when ``MIXEDREG_PURE_PYTHON=1`` is set, the pure-Python
``mixedreg._core_py`` is used. Both expose the same functions.
"""

import os

from . import _core_py

if os.environ.get("MIXEDREG_PURE_PYTHON", "") not in ("", "0"):
    _impl = _core_py
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _core_py

BACKEND = _impl.BACKEND

grid_pair_losses = _impl.grid_pair_losses
grid_pair_search = _impl.grid_pair_search
first_consistent_assignment = _impl.first_consistent_assignment


def backends():
    """Every importable backend module, keyed by name."""
    found = {"python": _core_py}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        found["cython"] = _core
    return found
