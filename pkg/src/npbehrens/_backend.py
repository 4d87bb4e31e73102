"""Select the tie-block kernel at import time.

The compiled extension is preferred. Set ``NPBEHRENS_BACKEND=python`` to
force the numpy fallback (both produce identical integers).
"""

import os

import numpy as np

from . import _pycore

_requested = os.environ.get("NPBEHRENS_BACKEND", "auto").lower()

if _requested == "python":
    _compiled = None
else:
    try:
        from . import _core as _compiled
    except ImportError:
        if _requested == "compiled":
            raise
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def block_moments(blocks, labels, backend=None):
    """Dispatch to the selected kernel; ``backend`` overrides the default."""
    blocks = np.ascontiguousarray(blocks, dtype=np.int64)
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if blocks.ndim == 1:
        blocks = blocks[None, :]
    if labels.ndim == 1:
        labels = labels[None, :]
    use = backend or BACKEND
    if use == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        return _compiled.block_moments(blocks, labels)
    if use == "python":
        return _pycore.block_moments(blocks, labels)
    raise ValueError(f"unknown backend {backend!r}")


def sorted_blocks(values, n1):
    """Sort pooled rows and return ``(blocks, labels)`` for the kernel.

    ``values`` is ``(R, N)`` (or ``(N,)``) with group 1 in the first ``n1``
    columns. Ties are exact float equality.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[None, :]
    order = np.argsort(values, axis=1, kind="stable")
    ordered = np.take_along_axis(values, order, axis=1)
    blocks = np.zeros(values.shape, dtype=np.int64)
    np.cumsum(ordered[:, 1:] != ordered[:, :-1], axis=1, out=blocks[:, 1:])
    labels = (order >= n1).astype(np.uint8)
    return blocks, labels
