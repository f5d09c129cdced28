"""Numba-compiled kernel backend. Results are bit-identical to the numpy one."""

import numpy as np
from numba import njit


@njit(cache=True)
def longest_run_matrix(a, b):
    na, nb = a.shape[0], b.shape[0]
    l = a.shape[1]
    out = np.zeros((na, nb), dtype=np.int64)
    for i in range(na):
        for j in range(nb):
            best = 0
            run = 0
            for t in range(l):
                if a[i, t] == b[j, t]:
                    run += 1
                    if run > best:
                        best = run
                else:
                    run = 0
            out[i, j] = best
    return out


@njit(cache=True)
def reaction_matrix(epitopes, paratopes, s, min_overlap, shifted):
    ne, npar = epitopes.shape[0], paratopes.shape[0]
    l = epitopes.shape[1]
    out = np.zeros((ne, npar), dtype=np.int64)
    shift_max = (l - min_overlap) if shifted else 0
    for j in range(ne):
        for i in range(npar):
            total = 0
            for k in range(-shift_max, shift_max + 1):
                t0 = k if k > 0 else 0
                t1 = l + k if k < 0 else l
                count = 0
                for t in range(t0, t1):
                    if paratopes[i, t] != epitopes[j, t - k]:
                        count += 1
                if count >= s:
                    total += 1 + (count - s)
            out[j, i] = total
    return out
