"""Pure numpy implementation of the tie-block scan.

Used when the compiled ``_core`` extension is unavailable, or when
``NPBEHRENS_BACKEND=python`` is set.
"""

import numpy as np


def block_moments(blocks, labels):
    """Doubled placement sums for each labelling of a sorted pooled sample.

    Parameters
    ----------
    blocks : (R, N) or (1, N) int64 array
        Tie-block index of each sorted position; nondecreasing along a row,
        starting at 0. A single row is shared by all label rows.
    labels : (R, N) uint8 array
        1 where the sorted position belongs to group 2, else 0.

    Returns
    -------
    (R, 5) int64 array
        Columns ``P1, Q1, P2, Q2, TIES``: sums of ``2 * placement`` and of
        ``(2 * placement) ** 2`` for groups 1 and 2, and the number of tied
        cross-group pairs. Doubling keeps every placement integral, so all
        sums are exact.
    """
    blocks = np.asarray(blocks, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.uint8)
    if labels.ndim != 2 or blocks.ndim != 2:
        raise ValueError("blocks and labels must be 2-d")
    n_rows, n = labels.shape
    if blocks.shape[1] != n:
        raise ValueError("blocks and labels must have the same number of columns")
    if blocks.shape[0] == 1:
        blocks = np.broadcast_to(blocks, (n_rows, n))
    elif blocks.shape[0] != n_rows:
        raise ValueError("blocks must have one row or as many rows as labels")

    flat = (np.arange(n_rows, dtype=np.int64)[:, None] * n + blocks).ravel()
    in2 = labels.ravel().astype(bool)
    total = np.bincount(flat, minlength=n_rows * n).reshape(n_rows, n)
    c2 = np.bincount(flat[in2], minlength=n_rows * n).reshape(n_rows, n)
    c1 = total - c2
    below1 = np.cumsum(c1, axis=1) - c1
    below2 = np.cumsum(c2, axis=1) - c2
    t2 = 2 * below1 + c1
    t1 = 2 * below2 + c2

    out = np.empty((n_rows, 5), dtype=np.int64)
    out[:, 0] = (c1 * t1).sum(axis=1)
    out[:, 1] = (c1 * t1 * t1).sum(axis=1)
    out[:, 2] = (c2 * t2).sum(axis=1)
    out[:, 3] = (c2 * t2 * t2).sum(axis=1)
    out[:, 4] = (c1 * c2).sum(axis=1)
    return out
