"""Backend selection for the GP hot loop.

The compiled extension is used when it was built; otherwise (or when
``ADAPTIVE_POMCP_PURE=1`` is set) the numpy fallback is used.
"""

import os

if os.environ.get("ADAPTIVE_POMCP_PURE", "") not in ("", "0"):
    from ._gpkernel_py import kernel_vector, posterior_solve

    BACKEND = "python"
else:
    try:
        from ._gpkernel import kernel_vector, posterior_solve

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._gpkernel_py import kernel_vector, posterior_solve

        BACKEND = "python"

__all__ = ["BACKEND", "kernel_vector", "posterior_solve"]
