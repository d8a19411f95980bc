"""Backend selection for the hot propagation kernel.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``DEVRANK_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available_backends():
    return sorted(_BACKENDS)


def _initial_backend():
    requested = os.environ.get("DEVRANK_BACKEND", "").strip().lower()
    if requested:
        if requested not in _BACKENDS:
            raise ImportError(f"DEVRANK_BACKEND={requested!r} is not available; have {available_backends()}")
        return requested
    return "cython" if "cython" in _BACKENDS else "python"


BACKEND = _initial_backend()
_impl = _BACKENDS[BACKEND]


def set_backend(name):
    """Switch the active backend; returns the previous backend name."""
    global BACKEND, _impl
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    previous = BACKEND
    BACKEND, _impl = name, _BACKENDS[name]
    return previous


def csr_gather(indptr, indices, weights, x, threads=1):
    """out[i] = sum of weights[e] * x[indices[e]] for e in row i."""
    return _impl.csr_gather(indptr, indices, weights, x, threads)
