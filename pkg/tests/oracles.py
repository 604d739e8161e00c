"""Reference implementations used as test oracles.

Each one is written directly from the defining formula with plain loops or
exact rationals, sharing no code with the package.
"""
import itertools
import math
from fractions import Fraction

import numpy as np


def contract(data: np.ndarray, x) -> list[float]:
    """(A x^(m-1))_i by explicit lexicographic loops, left-to-right float sums.

    Each term is a * (x_i2 * ... * x_im), the product formed left to right.
    """
    n, m = data.shape[0], data.ndim
    out = []
    for i in range(n):
        acc = 0.0
        for rest in itertools.product(range(n), repeat=m - 1):
            prod = 1.0
            for j in rest:
                prod *= float(x[j])
            acc += float(data[(i,) + rest]) * prod
        out.append(acc)
    return out


def off_entries(data: np.ndarray, i: int) -> list:
    n, m = data.shape[0], data.ndim
    return [data[(i,) + rest] for rest in itertools.product(range(n), repeat=m - 1)
            if rest != (i,) * (m - 1)]


def b_class(data: np.ndarray) -> str:
    """Definition of B / B0 in exact rationals."""
    n, m = data.shape[0], data.ndim
    N = n ** (m - 1)
    strict = weak = True
    for i in range(n):
        row = [Fraction(float(v)) for v in data[i].ravel()]
        S = sum(row)
        off = [Fraction(float(v)) for v in off_entries(data, i)]
        strict &= S > 0 and all(S / N > b for b in off)
        weak &= S >= 0 and all(S / N >= b for b in off)
    return "B" if strict else ("B0_NOT_B" if weak else "NEITHER")


def row_sums_exact(data: np.ndarray) -> list[Fraction]:
    return [sum(Fraction(float(v)) for v in data[i].ravel()) for i in range(data.shape[0])]


def subtensor(data: np.ndarray, J) -> np.ndarray:
    r, m = len(J), data.ndim
    out = np.empty((r,) * m)
    for idx in itertools.product(range(r), repeat=m):
        out[idx] = data[tuple(J[k] for k in idx)]
    return out


def is_p_matrix(M: np.ndarray) -> bool:
    """All principal minors positive."""
    n = M.shape[0]
    for r in range(1, n + 1):
        for J in itertools.combinations(range(n), r):
            if np.linalg.det(M[np.ix_(J, J)]) <= 0:
                return False
    return True


def diagonal_z_spectrum(d, m: int) -> set[float]:
    """Z-eigenvalues of diag(d), order m, by enumerating supports.

    On a support S every x_i (i in S) satisfies d_i x_i^(m-2) = lam; for even
    m and d_i of one sign, x_i^2 = (lam / d_i)^(2/(m-2)) and sum x_i^2 = 1
    fixes lam.  Only valid for m = 4 with positive d (all the tests need).
    """
    assert m == 4 and all(v > 0 for v in d)
    out = set()
    n = len(d)
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            # x_i^2 = lam / d_i, sum = 1  =>  lam = 1 / sum(1/d_i)
            lam = 1.0 / sum(1.0 / d[i] for i in S)
            out.add(round(lam, 12))
    return out


def max_abs_row_sum(data: np.ndarray) -> float:
    n = data.shape[0]
    return max(math.fsum(abs(float(v)) for v in data[i].ravel()) for i in range(n))
