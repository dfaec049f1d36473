"""Select the sampling core at import: compiled extension if present,
pure-Python twin otherwise.  Both expose the same functions over the same
random stream; ``PJMP_BACKEND=python`` forces the pure twin."""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PJMP_BACKEND", "").lower() == "python":
    active = _kernels_py
else:
    try:
        from . import _kernels_c as active  # type: ignore[attr-defined]
    except ImportError:
        active = _kernels_py


def backend_name() -> str:
    """'c' when the compiled core is active, 'python' otherwise."""
    return active.BACKEND


def get_backend(name: str):
    """Fetch a specific backend module ('c' or 'python'); raises ImportError
    when the compiled core was not built."""
    if name == "python":
        return _kernels_py
    if name == "c":
        from . import _kernels_c  # type: ignore[attr-defined]

        return _kernels_c
    raise ValueError(f"unknown backend {name!r}")
