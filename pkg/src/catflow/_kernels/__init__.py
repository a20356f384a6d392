"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used.  `use_backend` switches explicitly (the benchmark uses
it to time both).
"""
from __future__ import annotations

from . import _fallback

try:
    from . import _core as _compiled
except ImportError:  # pragma: no cover - depends on build environment
    _compiled = None

active = _compiled if _compiled is not None else _fallback


def backend_name() -> str:
    return "compiled" if active is _compiled else "python"


def has_compiled() -> bool:
    return _compiled is not None


def use_backend(name: str) -> None:
    """Select 'compiled' or 'python'; raises if the extension is missing."""
    global active
    if name == "python":
        active = _fallback
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def euclidean_tractrix(*args, **kwargs):
    return active.euclidean_tractrix(*args, **kwargs)


def sphere_tractrix(*args, **kwargs):
    return active.sphere_tractrix(*args, **kwargs)


def arc_glued_tractrix(*args, **kwargs):
    return active.arc_glued_tractrix(*args, **kwargs)


def psi_glued_tractrix(*args, **kwargs):
    return active.psi_glued_tractrix(*args, **kwargs)
