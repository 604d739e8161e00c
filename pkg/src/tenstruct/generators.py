"""Seeded random tensors from each structural class.

Randomness comes from numpy's Philox counter-based generator, keyed by the
64-bit seed, so a (spec, seed) pair gives the same tensor on every platform.

Class-constrained generators (B, B0, Z) draw their entries on a dyadic lattice
``q * k`` with ``q = 2**floor(log2(scale)) / 16`` and integer ``k`` in
``[-K, K]``, ``K = floor(scale / q)``.  Row sums are then exact in binary
floating point and the target class holds by construction, including the
boundary (weak-inequality) cases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalDisagreement
from .structure_checks import b_classify, diagonal_dominance, is_z_tensor
from .tensor_core import DenseTensor, _orbit_ids, is_symmetric, symmetrize

CLASSES = ("B", "B0", "Z_diag_dominated", "symmetric", "general")


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int
    cls: str = "general"
    seed: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.m < 2 or self.n < 1:
            raise ValueError(f"need m >= 2 and n >= 1, got m={self.m}, n={self.n}")
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}; expected one of {CLASSES}")
        if not (math.isfinite(self.scale) and self.scale >= 0):
            raise ValueError("scale must be finite and >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "GenSpec":
        return cls(
            m=int(doc["m"]),
            n=int(doc["n"]),
            cls=doc.get("class", "general"),
            seed=int(doc.get("seed", 0)),
            scale=float(doc.get("scale", 1.0)),
        )

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "class": self.cls,
                "seed": self.seed, "scale": self.scale}


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def _lattice(scale: float) -> tuple[float, int]:
    if scale == 0:
        return 0.0, 0
    q = 2.0 ** math.floor(math.log2(scale)) / 16
    return q, int(scale // q)


def _diag_mask(m: int, n: int) -> np.ndarray:
    width = n ** (m - 1)
    mask = np.zeros((n, width), dtype=bool)
    step = sum(n**k for k in range(m - 1))
    mask[np.arange(n), np.arange(n) * step] = True
    return mask


def _check(ok: bool, what: str) -> None:
    if not ok:
        raise InternalDisagreement(f"generated tensor failed its class check: {what}")


def gen_b_tensor(spec: GenSpec) -> DenseTensor:
    """B tensor (cls "B") or B0 tensor (cls "B0").

    Off-diagonal entries are sampled, then each diagonal is lifted to
    ``N * max(0, off) - sum(off) + slack`` with ``N = n**(m-1)``.  For B the
    slack is positive; for B0 each row gets zero slack with probability 1/2.
    """
    if spec.cls not in ("B", "B0"):
        raise ValueError("gen_b_tensor needs class 'B' or 'B0'")
    m, n = spec.m, spec.n
    rng = rng_for(spec.seed)
    q, K = _lattice(spec.scale)
    N = n ** (m - 1)
    mask = _diag_mask(m, n)
    k = rng.integers(-K, K + 1, size=(n, N))
    k[mask] = 0
    kmax = np.where(mask, np.iinfo(np.int64).min, k).max(axis=1) if N > 1 else np.zeros(n, int)
    beta = np.maximum(kmax, 0)
    slack = rng.integers(1, max(K, 1) + 1, size=n)
    if spec.cls == "B0":
        slack = np.where(rng.random(n) < 0.5, 0, slack)
    if K == 0:
        slack[:] = 0
    k[mask] = N * beta - k.sum(axis=1) + slack
    B = DenseTensor((k * q).reshape((n,) * m))
    verdict = b_classify(B).verdict
    _check(verdict == "B" if spec.cls == "B" and K > 0 else verdict != "NEITHER", spec.cls)
    return B


def gen_z_diag_dominated(spec: GenSpec, strict: bool = True, *, symmetric: bool = False,
                         zero_offdiag: bool = False) -> DenseTensor:
    """Z tensor whose diagonal is its absolute off-diagonal row sum plus slack.

    Slack is positive when ``strict`` and zero otherwise.  With ``symmetric``
    one value is drawn per index-permutation orbit, so the result is exactly
    symmetric.  The B / B0 verdict implied for Z tensors is asserted.
    """
    m, n = spec.m, spec.n
    rng = rng_for(spec.seed)
    q, K = _lattice(spec.scale)
    N = n ** (m - 1)
    mask = _diag_mask(m, n)
    k = -rng.integers(0, K + 1, size=n**m)
    if symmetric:
        k = k[_orbit_ids(m, n)]
    k = k.reshape(n, N)
    if zero_offdiag:
        k[:] = 0
    k[mask] = 0
    slack = rng.integers(1, max(K, 1) + 1, size=n) if strict else np.zeros(n, dtype=np.int64)
    k[mask] = -k.sum(axis=1) + slack
    A = DenseTensor((k * q).reshape((n,) * m))
    _check(is_z_tensor(A), "Z")
    _check(diagonal_dominance(A, strict=False), "diagonal dominance")
    if K > 0 or not strict:
        _check(diagonal_dominance(A, strict=True) == strict, "strict dominance flag")
    verdict = b_classify(A).verdict
    _check(verdict == "B" if diagonal_dominance(A, strict=True) else verdict == "B0_NOT_B",
           "B verdict of a dominated Z tensor")
    if symmetric:
        _check(is_symmetric(A), "symmetry")
    return A


def gen_symmetric(spec: GenSpec) -> DenseTensor:
    """Gaussian entries with standard deviation ``scale``, averaged over orbits."""
    rng = rng_for(spec.seed)
    raw = DenseTensor(spec.scale * rng.standard_normal((spec.n,) * spec.m))
    A = symmetrize(raw)
    _check(is_symmetric(A), "symmetry")
    return A


def gen_general(spec: GenSpec) -> DenseTensor:
    rng = rng_for(spec.seed)
    return DenseTensor(spec.scale * rng.standard_normal((spec.n,) * spec.m))


def gen_even_power_sum(spec: GenSpec, terms: int = 3) -> DenseTensor:
    """sum_k w_k v_k^{(x)m} with w_k > 0: symmetric, and PSD when m is even."""
    rng = rng_for(spec.seed)
    m, n = spec.m, spec.n
    out = np.zeros((n,) * m)
    for _ in range(terms):
        v = rng.standard_normal(n)
        w = spec.scale * rng.uniform(0.5, 1.5)
        t = np.ones(())
        for _ in range(m):
            t = np.multiply.outer(t, v)
        out += w * t
    return symmetrize(DenseTensor(out))


def generate(spec: GenSpec) -> DenseTensor:
    if spec.cls in ("B", "B0"):
        return gen_b_tensor(spec)
    if spec.cls == "Z_diag_dominated":
        return gen_z_diag_dominated(spec, strict=True)
    if spec.cls == "symmetric":
        return gen_symmetric(spec)
    return gen_general(spec)


def corpus_filename(spec: GenSpec) -> str:
    return f"{spec.cls}_{spec.m}_{spec.n}_{spec.seed}.json"
