"""Kernel backend selection.

The compiled extension (ironia.kernels._native) is preferred when it built;
otherwise the numpy reference implementation is used. Set IRONIA_PURE_PYTHON=1
to force the reference backend, e.g. for benchmarking the two against each
other. Both backends expose the same functions and agree numerically
(bit-identically for the integer-driven stub expansion).
"""

from __future__ import annotations

import os

from . import reference

try:
    from . import _native
except ImportError:
    _native = None

_BACKENDS = {"reference": reference}
if _native is not None:
    _BACKENDS["native"] = _native

if _native is not None and not os.environ.get("IRONIA_PURE_PYTHON"):
    _active = _native
else:
    _active = reference


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Return a kernel backend module; the active one when name is None."""
    if name is None:
        return _active
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"no kernel backend named {name!r}; have {available_backends()}")


def set_backend(name: str):
    """Switch the active backend; returns the previous one's name."""
    global _active
    previous = _active.NAME
    _active = get_backend(name)
    return previous


def active_backend_name() -> str:
    return _active.NAME
