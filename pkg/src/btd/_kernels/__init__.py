"""Kernel backend selection.

The compiled Cython kernels are used when present; otherwise the numpy
fallback takes over. Set BTD_KERNELS=python or BTD_KERNELS=compiled to
force a backend (the default "auto" prefers compiled).
"""

import os

from . import pykernels

_requested = os.environ.get("BTD_KERNELS", "auto")
if _requested not in ("auto", "compiled", "python"):
    raise RuntimeError(f"BTD_KERNELS must be auto, compiled or python, got {_requested!r}")

if _requested == "python":
    _impl = pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise RuntimeError(
                "BTD_KERNELS=compiled but the btd._kernels._ckernels extension "
                "is not built; reinstall the package or use BTD_KERNELS=python"
            )
        _impl = pykernels
        BACKEND = "python"

conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
maxpool_forward = _impl.maxpool_forward
maxpool_backward = _impl.maxpool_backward
fill_u64 = _impl.fill_u64


def get_backend(name):
    """Return a specific kernel module ("python" or "compiled"), for
    benchmarks and equivalence tests."""
    if name == "python":
        return pykernels
    if name == "compiled":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    return names
