"""Hot kernels for tensor-factor application, with backend selection.

The compiled Cython extension is preferred when present; a numpy fallback
keeps the package fully functional without it.  Set SNMOMENTS_KERNELS=py
to force the fallback (used by the benchmark for comparison).
"""
from __future__ import annotations

import os

import numpy as np

from . import _apply_py

if os.environ.get("SNMOMENTS_KERNELS", "").lower() in ("py", "python", "numpy"):
    _impl = _apply_py
    BACKEND = "python"
else:
    try:
        from . import _apply_cy as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _apply_py
        BACKEND = "python"


def apply_pair_mix(x: np.ndarray, axis: int,
                   diag: np.ndarray, partner: np.ndarray, off: np.ndarray) -> np.ndarray:
    """Apply a two-nonzeros-per-row symmetric factor along one tensor axis.

    x must be C-contiguous float64; returns a new array of the same shape.
    """
    m = x.shape[axis]
    left = int(np.prod(x.shape[:axis], dtype=np.int64)) if axis else 1
    right = x.size // (left * m)
    out = np.empty_like(x)
    _impl.pair_mix_3d(diag, partner, off,
                      x.reshape(left, m, right), out.reshape(left, m, right))
    return out
