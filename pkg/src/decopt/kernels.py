"""Kernel backend selection.

The compiled extension ``decopt._core`` is used when importable; otherwise
the pure-Python twins in ``decopt._fallback`` are. Set ``DECOPT_KERNELS`` to
``python`` to force the fallback, or to ``cython`` to fail loudly when the
extension is missing.
"""

import importlib
import os
from types import ModuleType

from . import _fallback

KERNEL_NAMES = (
    "householder_tridiagonal",
    "tridiagonal_eigenvalues",
    "fastmix_recurrence",
    "matrix_power_apply",
)


def load_backend(name: str) -> ModuleType:
    """Return the kernel module for ``name`` (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _fallback
    if name == "cython":
        return importlib.import_module("decopt._core")
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def _select() -> tuple[str, ModuleType]:
    requested = os.environ.get("DECOPT_KERNELS", "").strip().lower()
    if requested in ("python", "cython"):
        return requested, load_backend(requested)
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", _fallback


BACKEND, _impl = _select()

householder_tridiagonal = _impl.householder_tridiagonal
tridiagonal_eigenvalues = _impl.tridiagonal_eigenvalues
fastmix_recurrence = _impl.fastmix_recurrence
matrix_power_apply = _impl.matrix_power_apply
