"""Kernel backend selection.

The compiled Cython extension is preferred when it imported cleanly; the
pure-numpy module is the fallback. ``HOPQA_KERNEL=pure|cython`` forces a
backend (``cython`` raises if the extension is unavailable).
"""

import os

from . import pure

_requested = os.environ.get("HOPQA_KERNEL", "").strip().lower()

if _requested == "pure":
    _backend = pure
else:
    try:
        from . import _core as _backend  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise
        _backend = pure

BACKEND = _backend.NAME
batch_scores = _backend.batch_scores
accumulate_grads = _backend.accumulate_grads
adagrad_update = _backend.adagrad_update


def get_backend(name=None):
    """Return a specific backend module (for benchmarks and parity tests)."""
    if name in (None, BACKEND):
        return _backend
    if name == "pure":
        return pure
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {name!r}")
