"""Numba kernels for the incremental mod-1 walk.

The phase recursion t_k = (t_{k-1} + delta_k) mod 1 is computed with
Kahan-compensated addition and floor reduction after every step. The
floor subtraction is exact in binary floating point for |t| < 2^52, so
the only per-step error is the rounding of the increment itself; the
compensation term keeps the summation error from growing with N.
Computing the raw sum first and reducing at the end would lose
precision once the sum is large.
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def mod1_walk(increments, t0, c0):
    """Phases of the compensated mod-1 walk; returns (phases, t, c).

    The (t, c) carry state allows streaming block by block.
    """
    out = np.empty(increments.shape[0])
    t = t0
    c = c0
    for i in range(increments.shape[0]):
        y = increments[i] - c
        s = t + y
        c = (s - t) - y
        t = s
        t -= np.floor(t)
        if t >= 1.0:
            t -= 1.0
        elif t < 0.0:
            t += 1.0
        out[i] = t
    return out, t, c


@numba.njit(cache=True, nogil=True, parallel=False)
def mod1_walk_rows(increments):
    """Row-wise compensated mod-1 walk for a batch of short paths."""
    n_rows, n = increments.shape
    out = np.empty((n_rows, n))
    for r in range(n_rows):
        t = 0.0
        c = 0.0
        for i in range(n):
            y = increments[r, i] - c
            s = t + y
            c = (s - t) - y
            t = s
            t -= np.floor(t)
            if t >= 1.0:
                t -= 1.0
            elif t < 0.0:
                t += 1.0
            out[r, i] = t
    return out
