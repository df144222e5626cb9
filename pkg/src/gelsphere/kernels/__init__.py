"""Hot-loop kernels with two interchangeable backends.

The numba backend is used when available; set GELSPHERE_NUMBA=0 to force
the pure-numpy fallback (useful for debugging and as the benchmark
baseline), GELSPHERE_NUMBA=1 to fail hard if numba cannot be imported.
"""

from __future__ import annotations

import os

from . import np_backend

_flag = os.environ.get("GELSPHERE_NUMBA", "auto").lower()

if _flag in ("0", "false", "off", "numpy"):
    _active = np_backend
elif _flag in ("1", "true", "on", "numba"):
    from . import nb_backend as _active
else:
    try:
        from . import nb_backend as _active
    except ImportError:
        _active = np_backend

BACKEND = _active.NAME

bilinear_sample = _active.bilinear_sample
gn_accumulate = _active.gn_accumulate
splat_add = _active.splat_add
shade = _active.shade


def backends():
    """All importable backends, for cross-checking and benchmarks."""
    out = {"numpy": np_backend}
    try:
        from . import nb_backend

        out["numba"] = nb_backend
    except ImportError:
        pass
    return out
