"""Overlap-kernel backend selection.

The rotated-cube scoring loop clips every candidate cell against a rotated
square; that inner loop dominates 2D solver runtime.  A Cython extension
(`_clip`) provides the compiled path and `reference` the pure-Python
fallback; both compute identical exact geometry.  Set ``BMOTV_NO_EXT=1``
to force the fallback.
"""

import os

from . import reference

if os.environ.get("BMOTV_NO_EXT"):
    impl = reference
else:
    try:
        from . import _clip as impl  # type: ignore[no-redef]
    except ImportError:
        impl = reference


def backend_name():
    return "python" if impl is reference else "compiled"
