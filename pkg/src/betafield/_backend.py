"""Kernel selection: the compiled extension when importable, else NumPy.

Set ``BETAFIELD_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

python = _pykernels

if os.environ.get("BETAFIELD_BACKEND", "").lower() == "python":
    kernels = _pykernels
    NAME = "python"
else:
    try:
        from . import _kernels as kernels
        NAME = "cython"
    except ImportError:  # extension not built
        kernels = _pykernels
        NAME = "python"

compiled = kernels if NAME == "cython" else None
