"""Select the kernel implementation at import time.

The compiled ``_ckernels`` module is used when it was built; otherwise the
NumPy fallback in ``_pykernels``. Setting ``CSDUALITY_PURE_PYTHON=1`` forces
the fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

compiled_kernels = None
if os.environ.get("CSDUALITY_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"
