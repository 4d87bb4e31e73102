# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tie-block scan over sorted pooled samples.

Must stay output-identical to :func:`npbehrens._pycore.block_moments`.
"""

import numpy as np

from libc.stdint cimport int64_t, uint8_t


def block_moments(const int64_t[:, :] blocks, const uint8_t[:, :] labels):
    """Doubled placement sums per row, see ``_pycore.block_moments``."""
    cdef Py_ssize_t n_rows = labels.shape[0]
    cdef Py_ssize_t n = labels.shape[1]
    if blocks.shape[1] != n:
        raise ValueError("blocks and labels must have the same number of columns")
    if blocks.shape[0] != 1 and blocks.shape[0] != n_rows:
        raise ValueError("blocks must have one row or as many rows as labels")

    out_arr = np.zeros((n_rows, 5), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef bint shared = blocks.shape[0] == 1
    cdef Py_ssize_t r, rb, j, k
    cdef int64_t blk, c1, c2, b1, b2, t1, t2
    cdef int64_t p1, q1, p2, q2, ties

    with nogil:
        for r in range(n_rows):
            rb = 0 if shared else r
            b1 = 0
            b2 = 0
            p1 = 0
            q1 = 0
            p2 = 0
            q2 = 0
            ties = 0
            j = 0
            while j < n:
                blk = blocks[rb, j]
                c1 = 0
                c2 = 0
                k = j
                while k < n and blocks[rb, k] == blk:
                    if labels[r, k]:
                        c2 += 1
                    else:
                        c1 += 1
                    k += 1
                t2 = 2 * b1 + c1
                t1 = 2 * b2 + c2
                p1 += c1 * t1
                q1 += c1 * t1 * t1
                p2 += c2 * t2
                q2 += c2 * t2 * t2
                ties += c1 * c2
                b1 += c1
                b2 += c2
                j = k
            out[r, 0] = p1
            out[r, 1] = q1
            out[r, 2] = p2
            out[r, 3] = q2
            out[r, 4] = ties
    return out_arr
