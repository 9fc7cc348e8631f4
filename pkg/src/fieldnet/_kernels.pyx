# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: potential accumulation and masked weight-row sums.

Semantics must stay in lockstep with the NumPy fallback in backends.py:
both accumulate per active pixel in the order given, so results agree
bit for bit on the potential path.
"""


def accumulate_potentials(double[:, ::1] kernel, long[::1] rows,
                          long[::1] cols, double[:, ::1] out):
    """Add kernel windows centred on each active pixel into ``out``.

    ``kernel`` is the (2H-1, 2W-1) per-charge table indexed by sensor
    offset; ``out`` is the (H, W) sensor grid, accumulated in place.
    """
    cdef Py_ssize_t H = out.shape[0]
    cdef Py_ssize_t W = out.shape[1]
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t p, i, j, r, c
    for p in range(n):
        r = rows[p]
        c = cols[p]
        for i in range(H):
            for j in range(W):
                out[i, j] += kernel[i - r + H - 1, j - c + W - 1]


def masked_row_sums(double[:, ::1] weights, long[::1] idx_flat,
                    long[::1] idx_offsets, double[:, ::1] out):
    """States of every weight row for a block of sparse binary inputs.

    ``idx_flat``/``idx_offsets`` hold the active flat-pixel indices of
    each input (CSR style).  ``out[b, m]`` receives the sum of row ``m``
    of ``weights`` over input ``b``'s active pixels.  Row-outer loop
    keeps each weight row hot in cache across the whole block.
    """
    cdef Py_ssize_t n_rows = weights.shape[0]
    cdef Py_ssize_t n_inputs = idx_offsets.shape[0] - 1
    cdef Py_ssize_t m, b, t, lo, hi
    cdef double acc
    for m in range(n_rows):
        for b in range(n_inputs):
            lo = idx_offsets[b]
            hi = idx_offsets[b + 1]
            acc = 0.0
            for t in range(lo, hi):
                acc += weights[m, idx_flat[t]]
            out[b, m] = acc
