"""Pure-numpy kernel backend (fallback when numba is unavailable or disabled)."""

import numpy as np


def longest_run_matrix(a, b):
    """Pairwise longest run of equal bits between rows of ``a`` and ``b``."""
    eq = a[:, None, :] == b[None, :, :]
    best = np.zeros(eq.shape[:2], dtype=np.int64)
    run = np.zeros(eq.shape[:2], dtype=np.int64)
    for t in range(a.shape[1]):
        run = (run + 1) * eq[:, :, t]
        np.maximum(best, run, out=best)
    return best


def reaction_matrix(epitopes, paratopes, s, min_overlap, shifted):
    """Summed reaction strengths; rows index epitopes, columns paratopes."""
    l = epitopes.shape[1]
    out = np.zeros((epitopes.shape[0], paratopes.shape[0]), dtype=np.int64)
    shift_max = (l - min_overlap) if shifted else 0
    for k in range(-shift_max, shift_max + 1):
        # paratope position t pairs with epitope position t - k
        t0, t1 = max(0, k), min(l, l + k)
        diff = epitopes[:, None, t0 - k : t1 - k] != paratopes[None, :, t0:t1]
        counts = diff.sum(axis=2, dtype=np.int64)
        out += np.where(counts >= s, counts - s + 1, 0)
    return out
