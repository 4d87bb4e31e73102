"""Brute-force reference implementations used only by the tests."""

import numpy as np


def kernel_matrix(x1, x2):
    """``h(x, y) = 1{x < y} + 1{x = y} / 2`` for all cross pairs."""
    x1 = np.asarray(x1, dtype=float)[:, None]
    x2 = np.asarray(x2, dtype=float)[None, :]
    return (x1 < x2) + 0.5 * (x1 == x2)


def pairwise_theta(x1, x2):
    return kernel_matrix(x1, x2).mean()


def pairwise_tau(x1, x2):
    return (np.asarray(x1, float)[:, None] == np.asarray(x2, float)[None, :]).mean()


def pairwise_placements(x1, x2):
    """Placements counted directly: how many of the other group lie below (ties 1/2)."""
    h = kernel_matrix(x1, x2)
    return (1.0 - h).sum(axis=1), h.sum(axis=0)


def pairwise_delong(x1, x2):
    p1, p2 = pairwise_placements(x1, x2)
    n1, n2 = len(p1), len(p2)
    s1 = p1.var(ddof=1) / n2**2
    s2 = p2.var(ddof=1) / n1**2
    return (n1 + n2) * (s1 / n1 + s2 / n2), s1, s2


def ustat_unbiased_variance(x1, x2):
    """Unbiased variance of theta_hat from U-statistics over pairs and triples.

    ``Var = [(n2-1) s10 + (n1-1) s01 + s11] / (n1 n2)`` with every moment
    replaced by its unbiased U-statistic (no clamping).
    """
    h = kernel_matrix(x1, x2)
    n1, n2 = h.shape
    rows = h.sum(axis=1)
    cols = h.sum(axis=0)
    total = h.sum()
    sq = (h * h).sum()
    same_x = ((rows**2).sum() - sq) / (n1 * n2 * (n2 - 1))
    same_y = ((cols**2).sum() - sq) / (n2 * n1 * (n1 - 1))
    same_xy = sq / (n1 * n2)
    distinct = (total**2 - (rows**2).sum() - (cols**2).sum() + sq) / (
        n1 * (n1 - 1) * n2 * (n2 - 1)
    )
    return (
        (n2 - 1) * (same_x - distinct) + (n1 - 1) * (same_y - distinct) + (same_xy - distinct)
    ) / (n1 * n2)


def brute_moments(x1, x2):
    """Kernel moments ``(P1, Q1, P2, Q2, TIES)`` from doubled pairwise placements."""
    p1, p2 = pairwise_placements(x1, x2)
    d1 = np.rint(2 * p1).astype(np.int64)
    d2 = np.rint(2 * p2).astype(np.int64)
    ties = int((np.asarray(x1, float)[:, None] == np.asarray(x2, float)[None, :]).sum())
    return np.array([d1.sum(), (d1 * d1).sum(), d2.sum(), (d2 * d2).sum(), ties])


def fuzz_pair(rng, n1, n2):
    """Two samples with a random tie structure, from heavy ties to none."""
    kind = rng.integers(4)
    if kind == 0:
        k = rng.integers(1, 4)
        return rng.integers(0, k, n1).astype(float), rng.integers(0, k, n2).astype(float)
    if kind == 1:
        k = rng.integers(2, 8)
        shift = rng.integers(-2, 3)
        return rng.integers(0, k, n1).astype(float), rng.integers(0, k, n2).astype(float) + shift
    if kind == 2:
        return rng.normal(size=n1), rng.normal(rng.normal() * 2, 1, size=n2)
    base = np.round(rng.normal(size=n1 + n2), 1)
    return base[:n1], base[n1:] + np.round(rng.normal() * 0.5, 1)
