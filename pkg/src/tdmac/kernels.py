"""Kernel selection: compiled extension if available, Python fallback otherwise.

Both implementations are bit-identical (integer phase bookkeeping, float
expressions in the same evaluation order), so which one is active never
changes results, only speed. Set TDMAC_PURE_PYTHON=1 before import to
force the fallback; benchmarks/bench_kernels.py compares the two.
"""

import os

from . import _kernels_py

if os.environ.get("TDMAC_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

run_schedule = _impl.run_schedule
transform_points = _impl.transform_points


def active_kernel() -> str:
    """Name of the kernel in use: 'compiled' or 'python'."""
    return _impl.KERNEL_NAME


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def implementations():
    """All importable kernel modules, keyed by name (for tests/benchmarks)."""
    mods = {"python": _kernels_py}
    try:
        from . import _kernels

        mods["compiled"] = _kernels
    except ImportError:
        pass
    return mods
