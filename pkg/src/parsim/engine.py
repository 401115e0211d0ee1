"""Engine backend selection: compiled extension when available, else Python.

Both engines are bit-identical by construction; "auto" just picks the fast
one.  Set PARSIM_ENGINE=python|compiled to override "auto" without touching
configs.
"""

from __future__ import annotations

import os

try:
    from . import _engine as _compiled  # noqa: F401
except ImportError:
    _compiled = None


def compiled_available() -> bool:
    return _compiled is not None


def available_engines() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def resolve_engine(name: str = "auto") -> str:
    """Map an engine request to a concrete backend name."""
    if name == "auto":
        env = os.environ.get("PARSIM_ENGINE", "").strip().lower()
        if env:
            name = env
    if name == "auto":
        return "compiled" if _compiled is not None else "python"
    if name == "python":
        return "python"
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError(
                "compiled engine requested but parsim._engine is not built"
            )
        return "compiled"
    raise ValueError(f"unknown engine {name!r}")
