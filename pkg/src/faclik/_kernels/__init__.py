"""Kernel implementation selection.

The compiled extension is preferred when present; `FACLIK_KERNELS=python`
forces the numpy fallback (useful for comparing both). Selection happens
once at import; callers may still request a specific implementation.
"""

from __future__ import annotations

import os

from . import pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

HAVE_COMPILED = _ckernels is not None

_env = os.environ.get("FACLIK_KERNELS", "auto").strip().lower()
if _env not in ("auto", "python", "compiled", ""):
    raise RuntimeError(f"FACLIK_KERNELS={_env!r}: expected auto, python, or compiled")
if _env == "compiled" and not HAVE_COMPILED:
    raise RuntimeError("FACLIK_KERNELS=compiled but the extension is not built")

DEFAULT_IMPL = "python" if _env == "python" or not HAVE_COMPILED else "compiled"


def resolve_impl(impl: str | None = None) -> str:
    """Map an impl request ('auto', 'python', 'compiled', None) to a name."""
    if impl in (None, "auto", ""):
        return DEFAULT_IMPL
    if impl == "python":
        return "python"
    if impl == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels requested but the extension is not built")
        return "compiled"
    raise ValueError(f"unknown kernel implementation {impl!r}")


def kernel_module(impl: str | None = None):
    return _ckernels if resolve_impl(impl) == "compiled" else pykernels
