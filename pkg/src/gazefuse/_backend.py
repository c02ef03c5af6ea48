"""Select the numerical kernel implementation at import time.

The compiled extension is preferred. Setting ``GAZEFUSE_PURE_PYTHON=1``
forces the pure-Python kernels, which is also what happens when the
extension was not built.
"""

import os

from . import _pykernels

pykernels = _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

ckernels = _ckernels

if _ckernels is not None and not os.environ.get("GAZEFUSE_PURE_PYTHON"):
    kernels = _ckernels
    BACKEND = "cython"
else:
    kernels = _pykernels
    BACKEND = "python"
