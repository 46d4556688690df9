"""Backend selection for the simulation stepping kernel.

The compiled extension is preferred when it was built at install time;
the pure-Python twin is the fallback. Both produce bit-identical runs.
Set ``COOPSIM_KERNEL=python`` (or ``compiled``) to force a backend.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:
    _kernel = None

_BACKENDS = {"python": _kernel_py}
if _kernel is not None:
    _BACKENDS["compiled"] = _kernel


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def default_backend() -> str:
    forced = os.environ.get("COOPSIM_KERNEL", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise RuntimeError(
                f"COOPSIM_KERNEL={forced!r} is not available; "
                f"choose from {available_backends()}"
            )
        return forced
    return "compiled" if _kernel is not None else "python"


def get_run_steps(backend: str | None = None):
    """The ``run_steps`` entry point of the chosen backend."""
    name = backend if backend is not None else default_backend()
    try:
        return _BACKENDS[name].run_steps
    except KeyError:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {available_backends()}"
        ) from None
