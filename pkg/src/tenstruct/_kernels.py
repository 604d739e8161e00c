"""Compiled inner loop for the exhaustive alpha lattice search."""
import math

import numpy as np
from numba import njit

OP_T = 0
OP_F = 1


@njit(cache=True)
def face_minimum(rows, m, vals, k, s, op):
    """Minimum of max_i x_i op(x)_i over one face {x_k = s} of the lattice.

    Coordinates j < k run over the interior values vals[1:-1], coordinates
    j > k over all of vals.  Points are visited in lexicographic order and
    only a strictly smaller value replaces the incumbent, so ``best_x`` is
    the lexicographically smallest minimizer on the face and ``last_x`` the
    largest.
    """
    n = rows.shape[0]
    width = rows.shape[1]
    nv = vals.size
    x = np.empty(n)
    best_x = np.empty(n)
    last_x = np.empty(n)
    best = np.inf
    lo = np.zeros(n, np.int64)
    hi = np.zeros(n, np.int64)
    for j in range(n):
        if j < k:
            lo[j] = 1
            hi[j] = nv - 1
        else:
            lo[j] = 0
            hi[j] = nv
        if j != k and lo[j] >= hi[j]:
            return best, best_x, last_x, 0
    digit = lo.copy()
    kr = x if m == 2 else np.empty(width)
    count = 0
    while True:
        for j in range(n):
            x[j] = s if j == k else vals[digit[j]]
        if m > 2:  # for m == 2, kr aliases x
            kr[0] = 1.0
            cur = 1
            for _ in range(m - 1):
                for a in range(cur - 1, -1, -1):
                    base = kr[a]
                    for b in range(n - 1, -1, -1):
                        kr[a * n + b] = base * x[b]
                cur *= n
        scale = 1.0
        if op == OP_T and m != 2:
            nrm2 = 0.0
            for j in range(n):
                nrm2 += x[j] * x[j]
            scale = nrm2 ** ((2.0 - m) / 2.0)
        g = -np.inf
        for i in range(n):
            y = 0.0
            for c in range(width):
                y += rows[i, c] * kr[c]
            if op == OP_F:
                y = math.copysign(abs(y) ** (1.0 / (m - 1)), y)
            else:
                y *= scale
            p = x[i] * y
            if p > g:
                g = p
        if g <= best:
            if g < best:
                best = g
                for j in range(n):
                    best_x[j] = x[j]
            for j in range(n):
                last_x[j] = x[j]
        count += 1
        # odometer: last coordinate fastest, skipping the fixed coordinate k
        j = n - 1
        while j >= 0:
            if j == k:
                j -= 1
                continue
            digit[j] += 1
            if digit[j] < hi[j]:
                break
            digit[j] = lo[j]
            j -= 1
        if j < 0:
            break
    return best, best_x, last_x, count
