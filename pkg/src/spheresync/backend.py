"""Select the stepping backend at import time.

The compiled extension is preferred when it imported cleanly; the pure-numpy
module is the fallback and is always available.  Set ``SPHERESYNC_BACKEND`` to
``compiled``, ``python``, or ``auto`` (the default) to override.  Requesting
``compiled`` when the extension failed to build raises ImportError rather than
silently downgrading.
"""

import os

from . import _kernel_py

_requested = os.environ.get("SPHERESYNC_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "compiled", "python"):
    raise ImportError(
        "SPHERESYNC_BACKEND must be 'auto', 'compiled', or 'python', "
        "got %r" % _requested
    )

_compiled = None
if _requested in ("auto", "compiled"):
    try:
        from . import _kernel as _compiled
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "SPHERESYNC_BACKEND=compiled but the extension module "
                "spheresync._kernel is not importable; rebuild the package "
                "or use SPHERESYNC_BACKEND=python"
            )
        _compiled = None

if _requested == "python":
    kernel = _kernel_py
else:
    kernel = _compiled if _compiled is not None else _kernel_py

BACKEND = kernel.BACKEND_NAME


def get_kernel(name=None):
    """Return a kernel module by name ('compiled' or 'python').

    With no argument, returns the active backend.  Used by the benchmark
    script to time both implementations side by side.
    """
    if name is None:
        return kernel
    if name == "python":
        return _kernel_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel is not available")
        return _compiled
    raise ValueError("unknown backend %r" % name)
