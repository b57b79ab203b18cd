"""Kernel dispatch: compiled Cython extension when built, numpy otherwise.

Set ``GEOVERB_PURE=1`` to force the numpy path.
"""

import os

from . import _pykernels

BACKEND = "numpy"
if os.environ.get("GEOVERB_PURE") != "1":
    try:
        from . import _ext as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

image_source_scan = _impl.image_source_scan
nearest_centroid = _impl.nearest_centroid
