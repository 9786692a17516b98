"""Kernel selection: compiled extension when available, pure fallback.

Set PSL2REP_PURE=1 to force the pure-Python kernel.
"""

import os

if os.environ.get("PSL2REP_PURE"):
    from psl2rep import _kernel_py as kernel
else:
    try:
        from psl2rep import _kernel as kernel  # type: ignore[attr-defined]
    except ImportError:
        from psl2rep import _kernel_py as kernel

KERNEL_IMPL: str = kernel.IMPL
