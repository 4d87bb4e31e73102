"""Rank quantities for two-sample data: mid, min and max ranks and placements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Sample:
    """Observations from one group."""

    values: np.ndarray
    group_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", as_values(self.values, self.group_label or "sample"))

    def __len__(self):
        return len(self.values)


def as_values(values, name="sample") -> np.ndarray:
    """Validate and convert observations to a 1-d float array."""
    if isinstance(values, Sample):
        return values.values
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _tie_blocks(values: np.ndarray):
    order = np.argsort(values, kind="stable")
    ordered = values[order]
    new_block = np.empty(len(values), dtype=bool)
    new_block[0] = True
    new_block[1:] = ordered[1:] != ordered[:-1]
    starts = np.flatnonzero(new_block)
    ends = np.append(starts[1:], len(values))  # exclusive
    block_of = np.cumsum(new_block) - 1
    return order, starts, ends, block_of


def min_max_ranks(values) -> tuple[np.ndarray, np.ndarray]:
    """Min-ranks (#smaller + 1) and max-ranks (#smaller or equal)."""
    values = as_values(values)
    order, starts, ends, block_of = _tie_blocks(values)
    rmin = np.empty(len(values))
    rmax = np.empty(len(values))
    rmin[order] = starts[block_of] + 1
    rmax[order] = ends[block_of]
    return rmin, rmax


def mid_ranks(values) -> np.ndarray:
    """Mid-ranks aligned to input order."""
    rmin, rmax = min_max_ranks(values)
    return 0.5 * (rmin + rmax)


@dataclass(frozen=True)
class RankSummary:
    """All rank quantities for a two-sample dataset.

    Arrays are indexed ``[group][k]`` with group 0 for sample 1.
    """

    pooled_mid: tuple[np.ndarray, np.ndarray]
    pooled_min: tuple[np.ndarray, np.ndarray]
    pooled_max: tuple[np.ndarray, np.ndarray]
    internal_mid: tuple[np.ndarray, np.ndarray]
    internal_min: tuple[np.ndarray, np.ndarray]
    internal_max: tuple[np.ndarray, np.ndarray]
    placements: tuple[np.ndarray, np.ndarray]

    @property
    def n1(self) -> int:
        return len(self.pooled_mid[0])

    @property
    def n2(self) -> int:
        return len(self.pooled_mid[1])


def placements(s1, s2) -> RankSummary:
    """Pooled and internal ranks of both groups plus placements ``R - R^(i)``."""
    x1 = as_values(s1, "sample 1")
    x2 = as_values(s2, "sample 2")
    n1 = len(x1)
    pmin, pmax = min_max_ranks(np.concatenate([x1, x2]))
    pmid = 0.5 * (pmin + pmax)
    imin1, imax1 = min_max_ranks(x1)
    imin2, imax2 = min_max_ranks(x2)
    imid1 = 0.5 * (imin1 + imax1)
    imid2 = 0.5 * (imin2 + imax2)
    split = lambda a: (a[:n1], a[n1:])  # noqa: E731
    mid = split(pmid)
    return RankSummary(
        pooled_mid=mid,
        pooled_min=split(pmin),
        pooled_max=split(pmax),
        internal_mid=(imid1, imid2),
        internal_min=(imin1, imin2),
        internal_max=(imax1, imax2),
        placements=(mid[0] - imid1, mid[1] - imid2),
    )
