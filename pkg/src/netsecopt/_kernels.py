"""Kernel selection: compiled Cython module when importable, else pure Python.

Set ``NETSECOPT_PURE_PYTHON=1`` to force the fallback.
"""

import os
from contextlib import contextmanager

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on build environment
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("NETSECOPT_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
    _impl = _ckernels
else:
    BACKEND = "python"
    _impl = _pykernels

propagate = _impl.propagate
reach = _impl.reach
shortest_distance = _impl.shortest_distance

CAP, AND_EX, OR_EX, SOURCE = _pykernels.CAP, _pykernels.AND_EX, _pykernels.OR_EX, _pykernels.SOURCE


@contextmanager
def use_backend(name: str):
    """Temporarily route the module-level kernels to another backend."""
    global BACKEND, propagate, reach, shortest_distance
    if name not in BACKENDS:
        raise ValueError(f"kernel backend {name!r} is not available")
    saved = BACKEND, propagate, reach, shortest_distance
    impl = BACKENDS[name]
    BACKEND, propagate, reach, shortest_distance = name, impl.propagate, impl.reach, impl.shortest_distance
    try:
        yield impl
    finally:
        BACKEND, propagate, reach, shortest_distance = saved
