"""Backend dispatch for the statevector batch kernels.

The compiled Cython module is used when it imports; otherwise the numpy
fallback is used. Set ``QKMEANS_BACKEND=python`` to force the fallback.
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = {"python": _pykernels}
if _core is not None:
    BACKENDS["compiled"] = _core

_active = None
name = None


def set_backend(backend):
    """Select ``"compiled"`` or ``"python"`` for all later simulation calls."""
    global _active, name
    if backend not in BACKENDS:
        raise ValueError(
            f"backend {backend!r} unavailable; have {sorted(BACKENDS)}"
        )
    _active = BACKENDS[backend]
    name = backend


def get_backend():
    return _active


_requested = os.environ.get("QKMEANS_BACKEND", "").strip().lower()
if _requested:
    set_backend(_requested)
else:
    set_backend("compiled" if _core is not None else "python")
log.debug("statevector backend: %s", name)
