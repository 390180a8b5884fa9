"""In-place gate kernels over a flat amplitude array.

Qubit ``k`` is bit ``k`` of the basis-state index. Every kernel takes a
``cmask`` with the control bits set; the gate acts only on basis states
where all of those bits are 1.

Two implementations live here: numba ``@njit`` loops and vectorised numpy
index arithmetic. Setting ``QENSEMBLE_DISABLE_NUMBA=1`` (or running without
numba installed) selects the numpy path.
"""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

_SQRT1_2 = 0.7071067811865476

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("QENSEMBLE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = numba is not None and not _DISABLED


# --------------------------------------------------------------------------
# numpy path
# --------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _lower_indices(size: int, zero_mask: int, one_mask: int) -> np.ndarray:
    """Indices with every bit of ``zero_mask`` clear and every bit of ``one_mask`` set."""
    idx = np.arange(size, dtype=np.int64)
    keep = ((idx & zero_mask) == 0) & ((idx & one_mask) == one_mask)
    out = idx[keep]
    out.flags.writeable = False
    return out


def x_numpy(amps: np.ndarray, target: int, cmask: int) -> None:
    bit = 1 << target
    i0 = _lower_indices(amps.size, bit, cmask)
    i1 = i0 | bit
    amps[i0], amps[i1] = amps[i1], amps[i0]


def h_numpy(amps: np.ndarray, target: int, cmask: int) -> None:
    bit = 1 << target
    i0 = _lower_indices(amps.size, bit, cmask)
    i1 = i0 | bit
    a, b = amps[i0], amps[i1]
    amps[i0] = (a + b) * _SQRT1_2
    amps[i1] = (a - b) * _SQRT1_2


def swap_numpy(amps: np.ndarray, t1: int, t2: int, cmask: int) -> None:
    b1, b2 = 1 << t1, 1 << t2
    # states with t1=1, t2=0 trade places with t1=0, t2=1
    i0 = _lower_indices(amps.size, b2, cmask | b1)
    i1 = i0 ^ b1 ^ b2
    amps[i0], amps[i1] = amps[i1], amps[i0]


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def x_numba(amps, target, cmask):
        bit = 1 << target
        for i in range(amps.shape[0]):
            if (i & bit) == 0 and (i & cmask) == cmask:
                j = i | bit
                tmp = amps[i]
                amps[i] = amps[j]
                amps[j] = tmp

    @numba.njit(cache=True, nogil=True)
    def h_numba(amps, target, cmask):
        bit = 1 << target
        for i in range(amps.shape[0]):
            if (i & bit) == 0 and (i & cmask) == cmask:
                j = i | bit
                a = amps[i]
                b = amps[j]
                amps[i] = (a + b) * _SQRT1_2
                amps[j] = (a - b) * _SQRT1_2

    @numba.njit(cache=True, nogil=True)
    def swap_numba(amps, t1, t2, cmask):
        b1 = 1 << t1
        b2 = 1 << t2
        for i in range(amps.shape[0]):
            if (i & b1) != 0 and (i & b2) == 0 and (i & cmask) == cmask:
                j = i ^ b1 ^ b2
                tmp = amps[i]
                amps[i] = amps[j]
                amps[j] = tmp

else:  # pragma: no cover
    x_numba = h_numba = swap_numba = None


BACKENDS = {"numpy": (x_numpy, h_numpy, swap_numpy)}
if numba is not None:
    BACKENDS["numba"] = (x_numba, h_numba, swap_numba)

BACKEND = "numba" if USE_NUMBA else "numpy"
apply_x, apply_h, apply_swap = BACKENDS[BACKEND]
