"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback. ``GRWSIM_BACKEND=python`` forces the fallback.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"cython"``, ``"python"`` or
    ``None`` for the default)."""
    if name is None:
        name = os.environ.get("GRWSIM_BACKEND") or ("cython" if _ckernels is not None else "python")
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None


DEFAULT = get_backend()
