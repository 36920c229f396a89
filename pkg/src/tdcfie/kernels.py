"""Select the marching kernels: compiled extension if importable, else pure Python.

Set ``TDCFIE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _march_py

BACKEND = "python"
march_pece = _march_py.march_pece
march_implicit = _march_py.march_implicit

if not os.environ.get("TDCFIE_PURE_PYTHON"):
    try:
        from . import _march
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        march_pece = _march.march_pece
        march_implicit = _march.march_implicit

__all__ = ["BACKEND", "march_pece", "march_implicit"]
