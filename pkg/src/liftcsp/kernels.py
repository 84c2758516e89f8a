"""Backend selection for the search kernels.

The compiled Cython backend is used when importable; set LIFTCSP_PURE=1
to force the pure-Python twin (same algorithms, same outputs).
"""

import os

if os.environ.get("LIFTCSP_PURE") == "1":
    from liftcsp import _kernels_py as _impl
    BACKEND = "pure"
else:
    try:
        from liftcsp import _speedups as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        from liftcsp import _kernels_py as _impl
        BACKEND = "pure"

STANDARD = 0
INJECTIVE = 1
FULL = 2

FOUND = 0
NONE = 1
BUDGET = 2

hom_search = _impl.hom_search
canon_search = _impl.canon_search

VARIANT_CODES = {"standard": STANDARD, "injective": INJECTIVE, "full": FULL}


def backend_name():
    return BACKEND
