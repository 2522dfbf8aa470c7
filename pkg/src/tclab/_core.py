"""Backend selection for the per-atom kernels.

The compiled ``_kernels`` extension is used when importable; otherwise the
numpy fallback. Setting ``TCLAB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("TCLAB_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        kernels = _kernels_py
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
