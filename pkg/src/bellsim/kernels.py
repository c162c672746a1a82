"""Kernel selection: compiled extension if built, pure Python otherwise.

Set BELLSIM_PURE_PYTHON=1 to force the fallback (the benchmark uses this
to compare both implementations in one machine).
"""

from __future__ import annotations

import os

import numpy as np

from . import _pycoincidence

__all__ = ["match_sorted", "KERNEL_BACKEND"]

if os.environ.get("BELLSIM_PURE_PYTHON", "") not in ("", "0"):
    _impl = None
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _coincidence as _impl
        KERNEL_BACKEND = "compiled"
    except ImportError:
        _impl = None
        KERNEL_BACKEND = "python"


def match_sorted(t1: np.ndarray, t2: np.ndarray, half_window: float) -> int:
    """Greedy one-shot pairing count between two sorted timestamp arrays."""
    if KERNEL_BACKEND == "compiled":
        a = np.ascontiguousarray(t1, dtype=np.float64)
        b = np.ascontiguousarray(t2, dtype=np.float64)
        return int(_impl.match_sorted(a, b, half_window))
    # list indexing is markedly faster than ndarray scalar indexing here
    return _pycoincidence.match_sorted(
        np.asarray(t1, dtype=np.float64).tolist(),
        np.asarray(t2, dtype=np.float64).tolist(),
        float(half_window),
    )
