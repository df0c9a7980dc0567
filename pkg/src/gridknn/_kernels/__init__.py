"""Kernel backend selection.

The compiled extension is used when it imported cleanly; the numpy fallback
is always available.  ``get_backend(None)`` returns the default; pass
"compiled" or "python" to force one.
"""

from ..errors import BackendUnavailableError
from . import _binned_py

try:
    from . import _binned_cy
    HAVE_COMPILED = True
except ImportError:
    _binned_cy = None
    HAVE_COMPILED = False

DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"

__all__ = ["HAVE_COMPILED", "DEFAULT_BACKEND", "get_backend", "backend_names"]


def get_backend(name=None):
    """Kernel module for a backend name (None/"auto" picks the default)."""
    if name is None or name == "auto":
        name = DEFAULT_BACKEND
    if name == "python":
        return _binned_py
    if name == "compiled":
        if not HAVE_COMPILED:
            raise BackendUnavailableError(
                "compiled kernels are not installed; rebuild the package or "
                "use backend='python'"
            )
        return _binned_cy
    raise BackendUnavailableError(
        f"unknown backend {name!r}; expected 'compiled' or 'python'"
    )


def backend_names():
    """Backends usable in this installation."""
    return ("compiled", "python") if HAVE_COMPILED else ("python",)
