"""Hot-kernel backend selection.

The default backend is numba when importable; set ``MVGEO_BACKEND=numpy``
(or ``numba``) to force one. Both backends expose the same functions with
the same contracts.
"""

from __future__ import annotations

import os

from . import numpy_backend


def _select():
    choice = os.environ.get("MVGEO_BACKEND", "auto").lower()
    if choice == "numpy":
        return numpy_backend
    try:
        from . import numba_backend
    except ImportError:
        if choice == "numba":
            raise
        return numpy_backend
    if choice in ("numba", "auto"):
        return numba_backend
    raise ValueError(f"unknown MVGEO_BACKEND {choice!r}")


_backend = _select()

bilinear_many = _backend.bilinear_many
zncc_scores = _backend.zncc_scores


def backend_name() -> str:
    return _backend.NAME


def get_backend(name: str):
    """Fetch a backend module by name (used by the benchmark)."""
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend
        return numba_backend
    raise ValueError(name)
