"""Backend selection for the hot linear-algebra kernels.

The compiled Cython core is used when available; setting the environment
variable PDSPARSE_PURE_PYTHON=1 (or a failed extension build) falls back
to the pure-numpy twin.  Both backends implement identical algorithms and
pass the same accuracy tests; `python -m pdsparse.kernel_bench` times them
side by side.
"""

import os

if os.environ.get("PDSPARSE_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _pure as impl

    BACKEND = "python"
else:
    try:
        from . import _core as impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _pure as impl

        BACKEND = "python"

jacobi_eigh = impl.jacobi_eigh
cholesky_factor = impl.cholesky_factor
cholesky_solve_tri = impl.cholesky_solve_tri


def backend_name():
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND
