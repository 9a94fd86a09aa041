"""Backend selection for the scalar-curvature kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over.  :func:`use_backend` switches explicitly, which
the benchmark and the cross-backend tests rely on.
"""

from __future__ import annotations

from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_NAMES = ("single_warped", "doubly_warped", "eq21", "eq22")
_active: ModuleType = _compiled if _compiled is not None else _kernels_py


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _compiled is not None else [])


def backend() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def use_backend(name: str) -> str:
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global _active
    previous = backend()
    if name == "python":
        _active = _kernels_py
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def single_warped(f, f1, f2, n):
    return _active.single_warped(f, f1, f2, int(n))


def doubly_warped(u, u1, u2, v, v1, v2, p, q):
    return _active.doubly_warped(u, u1, u2, v, v1, v2, int(p), int(q))


def eq21(a, ar, at, arr, F, Fr, Ft, Frr, Ftt, n):
    return _active.eq21(a, ar, at, arr, F, Fr, Ft, Frr, Ftt, int(n))


def eq22(a, ar, arr, f, fr, frr, n):
    return _active.eq22(a, ar, arr, f, fr, frr, int(n))
