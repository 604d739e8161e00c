"""Dense real tensors of order m and dimension n, and the multilinear
operations the rest of the package is built on.

Entries are stored row-major in an ndarray of shape ``(n,) * m``; the first
index is the "row".  Indices are zero-based in the Python API and one-based
in the JSON document format.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateCoordinate,
    EmptyIndexSet,
    EvenRootOfNegative,
    IndexOutOfRange,
    NonFiniteEntry,
    SizeMismatch,
)

MAX_ENTRIES = 10**7


class DenseTensor:
    """Immutable order-``m``, dimension-``n`` real tensor."""

    __slots__ = ("_data",)

    def __init__(self, data: np.ndarray):
        data = np.array(data, dtype=float)  # always a private copy
        if data.ndim < 2:
            raise SizeMismatch(f"order must be >= 2, got {data.ndim}")
        n = data.shape[0]
        if n < 1 or any(s != n for s in data.shape):
            raise SizeMismatch(f"all modes must have equal size, got {data.shape}")
        if data.size > MAX_ENTRIES:
            raise SizeMismatch(f"n^m = {data.size} exceeds {MAX_ENTRIES}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteEntry("tensor entries must be finite")
        data.flags.writeable = False
        self._data = data

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def rows(self) -> np.ndarray:
        """View of shape ``(n, n**(m-1))``: row i lists a[i, ...] lexicographically."""
        return self._data.reshape(self.dim, -1)

    def diagonal(self) -> np.ndarray:
        idx = np.arange(self.dim)
        return self._data[(idx,) * self.order].copy()

    def __getitem__(self, idx):
        return self._data[idx]

    def __add__(self, other: "DenseTensor") -> "DenseTensor":
        _same_shape(self, other)
        return DenseTensor(self._data + other._data)

    def __sub__(self, other: "DenseTensor") -> "DenseTensor":
        _same_shape(self, other)
        return DenseTensor(self._data - other._data)

    def __neg__(self) -> "DenseTensor":
        return DenseTensor(-self._data)

    def __mul__(self, c: float) -> "DenseTensor":
        return DenseTensor(float(c) * self._data)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(
            np.array_equal(self._data, other._data)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"DenseTensor(order={self.order}, dim={self.dim})"


def _same_shape(a: DenseTensor, b: DenseTensor) -> None:
    if a.data.shape != b.data.shape:
        raise DimensionMismatch(f"shape {a.data.shape} vs {b.data.shape}")


def build_tensor(m: int, n: int, entries) -> DenseTensor:
    """Build a tensor from a dense sequence of length n**m or a coordinate map.

    A coordinate map is ``{(i1, ..., im): value}`` with zero-based indices;
    unlisted coordinates are zero.  Use :func:`from_json_dict` for one-based input.
    An iterable of ``(index_tuple, value)`` pairs is accepted too, in which
    case repeated coordinates are rejected.
    """
    if m < 2 or n < 1:
        raise SizeMismatch(f"need m >= 2 and n >= 1, got m={m}, n={n}")
    if n**m > MAX_ENTRIES:
        raise SizeMismatch(f"n^m = {n**m} exceeds {MAX_ENTRIES}")
    if isinstance(entries, Mapping):
        pairs = list(entries.items())
    elif isinstance(entries, np.ndarray) or (
        isinstance(entries, Sequence) and len(entries) > 0 and np.isscalar(entries[0])
    ):
        flat = np.asarray(entries, dtype=float).ravel()
        if flat.size != n**m:
            raise SizeMismatch(f"dense array has {flat.size} entries, expected {n**m}")
        return DenseTensor(flat.reshape((n,) * m))
    else:
        pairs = list(entries)

    data = np.zeros((n,) * m)
    seen = set()
    for idx, val in pairs:
        idx = tuple(int(i) for i in idx)
        if len(idx) != m:
            raise SizeMismatch(f"coordinate {idx} does not have {m} indices")
        if any(i < 0 or i >= n for i in idx):
            raise IndexOutOfRange(f"coordinate {idx} outside I_{n}")
        if idx in seen:
            raise DuplicateCoordinate(f"coordinate {idx} given twice")
        seen.add(idx)
        val = float(val)
        if not math.isfinite(val):
            raise NonFiniteEntry(f"entry at {idx} is {val}")
        data[idx] = val
    return DenseTensor(data)


def as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise DimensionMismatch(f"vector has length {v.size}, tensor has dim {n}")
    return v


def _kron_power(x: np.ndarray, k: int) -> np.ndarray:
    """x (x) x (x) ... (k factors), lexicographic order, left-to-right products."""
    out = np.ones(1)
    for _ in range(k):
        out = np.multiply.outer(out, x).ravel()
    return out


def _sequential_sum(terms: np.ndarray) -> np.ndarray:
    # cumsum accumulates strictly left to right, unlike sum's pairwise scheme
    if terms.shape[-1] == 0:
        return np.zeros(terms.shape[:-1])
    return np.cumsum(terms, axis=-1)[..., -1]


def contract_once(A: DenseTensor, x, compensated: bool = False) -> np.ndarray:
    """Return A x^{m-1}, the vector with entries sum a[i, i2..im] x[i2]...x[im].

    The sum over the n**(m-1) tuples runs in lexicographic order.  With
    ``compensated=True`` each row is summed with ``math.fsum`` instead.
    """
    x = as_vector(x, A.dim)
    terms = A.rows() * _kron_power(x, A.order - 1)
    if compensated:
        return np.array([math.fsum(row) for row in terms])
    return _sequential_sum(terms)


def contract_last(A: DenseTensor, x, k: int) -> np.ndarray:
    """Contract the last ``k`` modes of A with x; returns an order m-k array."""
    x = as_vector(x, A.dim)
    m, n = A.order, A.dim
    if not 0 <= k <= m:
        raise ValueError(f"cannot contract {k} modes of an order-{m} tensor")
    lead = A.data.reshape((n,) * (m - k) + (n**k,))
    return lead @ _kron_power(x, k)


def contract_batch(A: DenseTensor, X: np.ndarray) -> np.ndarray:
    """Row-wise A x^{m-1} for every row x of ``X`` (shape ``(B, n)``).

    Uses BLAS, so the summation order differs from :func:`contract_once`;
    results agree to rounding.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != A.dim:
        raise DimensionMismatch(f"batch shape {X.shape} incompatible with dim {A.dim}")
    B = X.shape[0]
    K = X
    for _ in range(A.order - 2):
        K = (K[:, :, None] * X[:, None, :]).reshape(B, -1)
    return K @ A.rows().T


def polynomial_value(A: DenseTensor, x, compensated: bool = False) -> float:
    """A x^m = x . (A x^{m-1}), summed in index order."""
    x = as_vector(x, A.dim)
    y = contract_once(A, x, compensated=compensated)
    terms = x * y
    if compensated:
        return math.fsum(terms)
    return float(_sequential_sum(terms))


def componentwise_power(x, p) -> np.ndarray:
    """x^{[p]} for an integer or rational exponent p.

    Odd-denominator roots are taken with sign, so (-27)^{[1/3]} = -3.
    Even-denominator roots of negative components raise EvenRootOfNegative.
    """
    x = as_vector(x)
    if isinstance(p, Integral):
        return x ** int(p)
    if isinstance(p, float):
        if p.is_integer():
            return x ** int(p)
        p = Fraction(p).limit_denominator(10**6)
    if not isinstance(p, Rational):
        p = Fraction(p)
    num, den = p.numerator, p.denominator
    if den == 1:
        return x**num
    if den % 2 == 0 and np.any(x < 0):
        raise EvenRootOfNegative(f"even root (1/{den}) of a negative component")
    root = _signed_root(x, den)
    return root**num if num != 1 else root


def _signed_root(x: np.ndarray, q: int) -> np.ndarray:
    if q == 3:
        return np.cbrt(x)
    a = np.abs(x)
    y = a ** (1.0 / q)
    pos = y > 0
    # one Newton step on y^q = a cleans up the last ulp or so
    y[pos] = y[pos] - (y[pos] ** q - a[pos]) / (q * y[pos] ** (q - 1))
    return np.sign(x) * y


def as_index_set(J: Iterable[int], n: int) -> tuple[int, ...]:
    J = [int(j) for j in J]
    if not J:
        raise EmptyIndexSet("index set must be nonempty")
    if any(j < 0 or j >= n for j in J):
        raise IndexOutOfRange(f"index set {J} not contained in I_{n}")
    if len(set(J)) != len(J):
        raise DuplicateCoordinate(f"index set {J} has repeated indices")
    return tuple(sorted(J))


def principal_subtensor(A: DenseTensor, J: Iterable[int]) -> DenseTensor:
    """Restrict every mode of A to the (zero-based) index set J."""
    J = as_index_set(J, A.dim)
    idx = np.ix_(*([np.array(J)] * A.order))
    return DenseTensor(A.data[idx])


def make_special(kind: str, m: int, n: int, d=None) -> DenseTensor:
    """``identity``, ``zero`` or ``diagonal`` (with diagonal vector ``d``)."""
    if m < 2 or n < 1:
        raise SizeMismatch(f"need m >= 2 and n >= 1, got m={m}, n={n}")
    data = np.zeros((n,) * m)
    idx = (np.arange(n),) * m
    if kind == "identity":
        data[idx] = 1.0
    elif kind == "diagonal":
        if d is None:
            raise DimensionMismatch("diagonal tensor needs a diagonal vector")
        data[idx] = as_vector(d, n)
    elif kind != "zero":
        raise ValueError(f"unknown special tensor kind {kind!r}")
    return DenseTensor(data)


@lru_cache(maxsize=64)
def _orbit_ids(m: int, n: int) -> np.ndarray:
    """Flat position of the sorted representative of each multi-index."""
    multi = np.indices((n,) * m).reshape(m, -1).T
    canon = np.sort(multi, axis=1)
    ids = np.ravel_multi_index(canon.T, (n,) * m)
    ids.flags.writeable = False
    return ids


def symmetrize(A: DenseTensor) -> DenseTensor:
    """Average entries over index-permutation orbits.

    Orbits whose entries are already equal are left untouched, so the map is
    exactly idempotent.
    """
    m, n = A.order, A.dim
    ids = _orbit_ids(m, n)
    flat = A.data.ravel()
    size = flat.size
    sums = np.bincount(ids, weights=flat, minlength=size)
    counts = np.bincount(ids, minlength=size)
    lo = np.full(size, np.inf)
    hi = np.full(size, -np.inf)
    np.minimum.at(lo, ids, flat)
    np.maximum.at(hi, ids, flat)
    mean = sums[ids] / counts[ids]
    out = np.where(lo[ids] == hi[ids], flat, mean)
    return DenseTensor(out.reshape(A.data.shape))


def is_symmetric(A: DenseTensor, tol: float = 0.0) -> bool:
    flat = A.data.ravel()
    return bool(np.all(np.abs(flat - flat[_orbit_ids(A.order, A.dim)]) <= tol))


# -- JSON document -----------------------------------------------------------

def to_json_dict(A: DenseTensor) -> dict:
    """Coordinate form with one-based indices; zero entries are omitted."""
    entries = [
        {"idx": [int(i) + 1 for i in idx], "val": float(A.data[idx])}
        for idx in zip(*np.nonzero(A.data))
    ]
    return {"order": A.order, "dim": A.dim, "entries": entries}


def from_json_dict(doc: dict) -> DenseTensor:
    """Inverse of :func:`to_json_dict`; also accepts a ``"dense"`` list."""
    try:
        m = int(doc["order"])
        n = int(doc["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SizeMismatch(f"tensor document needs integer 'order' and 'dim': {exc}") from None
    if "dense" in doc:
        return build_tensor(m, n, list(doc["dense"]))
    pairs = []
    for k, item in enumerate(doc.get("entries", [])):
        try:
            idx = tuple(int(i) - 1 for i in item["idx"])
            val = item["val"]
        except (KeyError, TypeError, ValueError):
            raise SizeMismatch(f"entries[{k}] must have 'idx' and 'val'") from None
        if any(i < 0 for i in idx):
            raise IndexOutOfRange(f"entries[{k}]: indices are one-based")
        pairs.append((idx, val))
    return build_tensor(m, n, pairs)
