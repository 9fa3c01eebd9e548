"""Hot eigensolver kernels with a numba path and a pure-numpy fallback.

The backend is chosen once from the ``PTANNULUS_BACKEND`` environment
variable (``numba`` or ``numpy``). The default is ``numba``; if numba cannot
be imported the numpy kernels are used with a warning. ``get(name)`` lets
tests and benchmarks pick a backend explicitly.
"""
import importlib
import os
import warnings

BACKEND_ENV = "PTANNULUS_BACKEND"
BACKENDS = ("numba", "numpy")


def _select():
    want = os.environ.get(BACKEND_ENV, "numba").strip().lower() or "numba"
    if want not in BACKENDS:
        raise ValueError(f"{BACKEND_ENV}={want!r}; expected one of {BACKENDS}")
    if want == "numba":
        try:
            import numba  # noqa: F401
        except ImportError:
            warnings.warn("numba unavailable, falling back to numpy kernels (much slower)")
            return "numpy"
    return want


BACKEND = _select()
_cache = {}


def get(name=None):
    """Return the kernel module for ``name`` (default: the selected backend)."""
    name = name or BACKEND
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name not in _cache:
        _cache[name] = importlib.import_module(f"{__name__}._{name}")
    return _cache[name]
