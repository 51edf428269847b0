"""Backward-pass kernel selection.

The compiled extension is preferred when it imported cleanly; set
HMDDP_KERNEL=python to force the numpy reference implementation (useful
for debugging and for the kernel benchmark).
"""

import os

from . import reference

if os.environ.get("HMDDP_KERNEL", "").lower() == "python":
    _impl = reference
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _compiled as _impl  # type: ignore[attr-defined]

        KERNEL_BACKEND = "compiled"
    except ImportError:
        _impl = reference
        KERNEL_BACKEND = "python"

backward_recursion = _impl.backward_recursion

__all__ = ["backward_recursion", "KERNEL_BACKEND", "reference"]
