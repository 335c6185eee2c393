"""Numba availability and backend selection.

Hot kernels in :mod:`kpzlab._kernels` are compiled with numba when it is
installed.  Setting the environment variable ``KPZLAB_NO_NUMBA=1`` forces the
pure-numpy fallbacks; this is also what happens automatically when numba is
not importable.  Both backends produce the same values (max/min kernels are
bit-identical, transcendental kernels agree to rounding), so the flag only
trades speed.
"""

from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    numba = None
    HAVE_NUMBA = False

_FALSEY = ("", "0", "false", "no")


def numba_enabled() -> bool:
    """True when numba-compiled kernels should be used."""
    if os.environ.get("KPZLAB_NO_NUMBA", "").strip().lower() not in _FALSEY:
        return False
    return HAVE_NUMBA
