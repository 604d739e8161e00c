"""H- and Z-eigenpairs of small symmetric tensors, extreme Z-eigenvalues and
definiteness verdicts for even order.

    H-eigenpair:  A x^(m-1) = lam x^[m-1],   x real, nonzero
    Z-eigenpair:  A x^(m-1) = lam x,         x real, x^T x = 1

The general path is a multistart search.  Each start runs the shifted
symmetric higher-order power method with a positive shift (converges to local
maxima of A x^m on the sphere), the same with a negative shift (local minima),
and plain Newton on the eigen-system (which also lands on saddle points); every
limit is polished by Newton and kept only if its residual passes.  Returned
lists are the pairs found, not a complete spectrum.  For n <= 2 the eigen-
systems reduce to one univariate polynomial and the roots give every real
eigenpair; those pairs are flagged ``certified``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NonConvergence
from .generators import rng_for
from .structure_checks import row_norm_bound
from .tensor_core import DenseTensor, contract_last, contract_once, is_symmetric, symmetrize


@dataclass(frozen=True)
class EigenConfig:
    starts: int = 64
    iters: int = 500
    shift: str = "adaptive"  # "fixed" or "adaptive"
    tol: float = 1e-10
    seed: int = 1
    definite_tol: float = 1e-9

    def __post_init__(self):
        if self.shift not in ("fixed", "adaptive"):
            raise ValueError(f"shift policy must be 'fixed' or 'adaptive', got {self.shift!r}")
        if self.starts < 1 or self.iters < 1 or not self.tol > 0:
            raise ValueError("starts, iters and tol must be positive")

    def to_dict(self) -> dict:
        return {"starts": self.starts, "iters": self.iters, "shift": self.shift,
                "tol": self.tol, "seed": self.seed, "definite_tol": self.definite_tol}


@dataclass
class EigenPair:
    lam: float
    x: np.ndarray
    kind: str
    residual: float
    certified: bool = False
    hits: int = 1

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "x": [float(v) for v in self.x], "kind": self.kind,
                "residual": self.residual, "certified": self.certified, "hits": self.hits}


def z_residual(A: DenseTensor, lam: float, x: np.ndarray) -> float:
    return float(np.abs(contract_once(A, x) - lam * x).max())


def h_residual(A: DenseTensor, lam: float, x: np.ndarray) -> float:
    return float(np.abs(contract_once(A, x) - lam * x ** (A.order - 1)).max())


def _z_lambda(A, x):
    return float(x @ contract_once(A, x))


def _h_lambda(A, x):
    xp = x ** (A.order - 1)
    denom = xp @ xp
    return float(xp @ contract_once(A, x) / denom) if denom > 0 else 0.0


def _newton(A: DenseTensor, x: np.ndarray, kind: str, tol: float, steps: int = 60):
    """Newton on [A x^(m-1) - lam x^(p); (x^T x - 1) / 2] = 0, p = 1 (Z) or m-1 (H)."""
    m, n = A.order, A.dim
    x = x / np.linalg.norm(x)
    lam_of = _z_lambda if kind == "Z" else _h_lambda
    res_of = z_residual if kind == "Z" else h_residual
    lam = lam_of(A, x)
    for _ in range(steps):
        if res_of(A, lam, x) <= tol * 1e-3:
            break
        y = contract_once(A, x)
        M = (m - 1) * contract_last(A, x, m - 2) if m > 2 else A.data.copy()
        J = np.zeros((n + 1, n + 1))
        if kind == "Z":
            r = y - lam * x
            J[:n, :n] = M - lam * np.eye(n)
            J[:n, n] = -x
        else:
            r = y - lam * x ** (m - 1)
            J[:n, :n] = M - lam * (m - 1) * np.diag(x ** (m - 2))
            J[:n, n] = -(x ** (m - 1))
        J[n, :n] = x
        F = np.append(r, (x @ x - 1) / 2)
        delta = np.linalg.lstsq(J, -F, rcond=None)[0]
        if not np.all(np.isfinite(delta)):
            break
        x = x + delta[:n]
        lam = lam + delta[n]
        nrm = np.linalg.norm(x)
        if nrm == 0 or not np.isfinite(nrm):
            return None
        x = x / nrm
    lam = lam_of(A, x)
    res = res_of(A, lam, x)
    return (lam, x, res) if res <= tol else None


def _sshopm(A: DenseTensor, x: np.ndarray, shift: float, cfg: EigenConfig) -> np.ndarray:
    """Shifted power iteration on the sphere; shift < 0 seeks local minima."""
    x = x / np.linalg.norm(x)
    lam = _z_lambda(A, x)
    sign = 1.0 if shift >= 0 else -1.0
    base = abs(shift)
    alpha = base
    for it in range(cfg.iters):
        y = sign * (contract_once(A, x) + sign * alpha * x)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            break
        x_new = y / nrm
        lam_new = _z_lambda(A, x_new)
        if sign * (lam_new - lam) < -1e-15 * (1 + abs(lam)) and alpha < base:
            alpha = min(2 * alpha, base)  # lost monotonicity: undo the last halving
            continue
        done = abs(lam_new - lam) <= 1e-15 * (1 + abs(lam))
        x, lam = x_new, lam_new
        if done:
            break
        if cfg.shift == "adaptive" and it % 25 == 24 and z_residual(A, lam, x) > cfg.tol:
            alpha /= 2
    return x


def _h_power(A: DenseTensor, x: np.ndarray, shift: float, iters: int) -> np.ndarray:
    """x <- (A x^(m-1) + shift x^[m-1])^[1/(m-1)], normalized; even m only."""
    p = A.order - 1
    x = x / np.linalg.norm(x)
    for _ in range(iters):
        y = contract_once(A, x) + shift * x**p
        x_new = np.sign(y) * np.abs(y) ** (1.0 / p)
        nrm = np.linalg.norm(x_new)
        if nrm == 0:
            break
        x_new /= nrm
        if np.abs(x_new - x).max() < 1e-14:
            x = x_new
            break
        x = x_new
    return x


def _prepare(A: DenseTensor) -> tuple[DenseTensor, bool]:
    if is_symmetric(A):
        return A, False
    return symmetrize(A), True


def _canonical(x: np.ndarray, m: int) -> np.ndarray:
    if m % 2:
        return x
    big = np.flatnonzero(np.abs(x) > 1e-8)
    return -x if big.size and x[big[0]] < 0 else x


def _same(a: EigenPair, b: EigenPair) -> bool:
    if abs(a.lam - b.lam) > 1e-6 * (1 + abs(a.lam)):
        return False
    return min(np.linalg.norm(a.x - b.x), np.linalg.norm(a.x + b.x)) <= 1e-4


def _dedupe(pairs: list[EigenPair]) -> list[EigenPair]:
    pairs = sorted(pairs, key=lambda p: (p.lam, tuple(p.x)))
    kept: list[EigenPair] = []
    for p in pairs:
        for q in kept:
            if _same(p, q):
                q.hits += p.hits
                q.certified = q.certified or p.certified
                break
        else:
            kept.append(p)
    return sorted(kept, key=lambda p: (-p.lam, tuple(p.x)))


def _with_partners(pairs: list[EigenPair], A: DenseTensor) -> list[EigenPair]:
    """Odd m: (lam, x) is a Z-pair iff (-lam, -x) is."""
    extra = [EigenPair(-p.lam, -p.x, p.kind, z_residual(A, -p.lam, -p.x), p.certified, 0)
             for p in pairs]
    merged = _dedupe([EigenPair(p.lam, p.x, p.kind, p.residual, p.certified, p.hits)
                      for p in pairs] + extra)
    return merged


@dataclass
class _Search:
    pairs: list = field(default_factory=list)
    best_residual: float = math.inf


def _collect(search, A, kind, x0, cfg, start):
    if x0 is None or not np.all(np.isfinite(x0)) or not np.any(x0):
        return
    got = _newton(A, x0, kind, cfg.tol)
    if got is None:
        lam_of = _z_lambda if kind == "Z" else _h_lambda
        res_of = z_residual if kind == "Z" else h_residual
        x = x0 / np.linalg.norm(x0)
        search.best_residual = min(search.best_residual, res_of(A, lam_of(A, x), x))
        return
    lam, x, res = got
    search.best_residual = min(search.best_residual, res)
    search.pairs.append((start, EigenPair(lam, _canonical(x, A.order), kind, res)))


def _finish(search: _Search, A: DenseTensor, kind: str, cfg: EigenConfig) -> list[EigenPair]:
    if not search.pairs:
        raise NonConvergence(
            f"no {kind}-eigenpair met tolerance {cfg.tol}",
            {"starts": cfg.starts, "best_residual": search.best_residual},
        )
    # hits counts distinct starts, not individual limits
    by_start = {}
    for start, p in search.pairs:
        by_start.setdefault(start, []).append(p)
    flat = []
    for start, ps in by_start.items():
        for p in _dedupe(ps):
            p.hits = 1
            flat.append(p)
    out = _dedupe(flat)
    if kind == "Z" and A.order % 2:
        out = _with_partners(out, A)
    return out


def z_eigenpairs(A: DenseTensor, cfg: EigenConfig | None = None) -> list[EigenPair]:
    """Z-eigenpairs found from ``cfg.starts`` seeded starts, sorted by lambda descending.

    Nonsymmetric input is symmetrized first (see :func:`symmetrized_input`).
    Pairs closer than 1e-6 (1 + |lam|) in value and 1e-4 in direction (up to
    sign) are merged; ``hits`` counts the starts that reached each pair.
    """
    cfg = cfg or EigenConfig()
    S, _ = _prepare(A)
    shift = 1.0 + (S.order - 1) * row_norm_bound(S).t_bound
    rng = rng_for(cfg.seed)
    search = _Search()
    for start in range(cfg.starts):
        x0 = rng.standard_normal(S.dim)
        if not np.any(x0):
            continue
        x0 /= np.linalg.norm(x0)
        _collect(search, S, "Z", x0, cfg, start)
        _collect(search, S, "Z", _sshopm(S, x0, shift, cfg), cfg, start)
        _collect(search, S, "Z", _sshopm(S, x0, -shift, cfg), cfg, start)
    return _finish(search, S, "Z", cfg)


def h_eigenpairs(A: DenseTensor, cfg: EigenConfig | None = None) -> list[EigenPair]:
    """H-eigenpairs (x scaled to unit 2-norm), sorted by lambda descending.

    For n <= 2 and m <= 4 the exact polynomial enumeration is used and every
    pair is certified, unless the system is degenerate (a continuum of
    eigenvectors), in which case the multistart search runs instead.
    """
    cfg = cfg or EigenConfig()
    S, _ = _prepare(A)
    if S.dim <= 2 and S.order <= 4:
        try:
            return h_eigenpairs_oracle(S, cfg.tol)
        except _Degenerate:
            pass
    rng = rng_for(cfg.seed)
    search = _Search()
    even = S.order % 2 == 0
    shift = 1.0 + row_norm_bound(S).t_bound
    for start in range(cfg.starts):
        x0 = rng.standard_normal(S.dim)
        if not np.any(x0):
            continue
        x0 /= np.linalg.norm(x0)
        _collect(search, S, "H", x0, cfg, start)
        if even:
            _collect(search, S, "H", _h_power(S, x0, shift, cfg.iters), cfg, start)
            _collect(search, S, "H", _h_power(-S, x0, shift, cfg.iters), cfg, start)
    return _finish(search, S, "H", cfg)


def symmetrized_input(A: DenseTensor) -> bool:
    """True when the eigen routines will work on the symmetrization of A."""
    return not is_symmetric(A)


# -- exact enumeration for n <= 2 ---------------------------------------------

class _Degenerate(Exception):
    pass


def _row_polys(A: DenseTensor) -> list[np.ndarray]:
    """Coefficients (ascending) of (A x^(m-1))_i at x = (t, 1), n = 2."""
    m = A.order
    polys = []
    for i in range(2):
        c = np.zeros(m)
        for rest in itertools.product(range(2), repeat=m - 1):
            c[rest.count(0)] += A.data[(i,) + rest]
        polys.append(c)
    return polys


def _real_roots(c: np.ndarray) -> list[float]:
    c = np.trim_zeros(c, "b")
    if c.size <= 1:
        return []
    roots = P.polyroots(c)
    scale = 1 + np.abs(roots)
    return sorted(float(r.real) for r, s in zip(roots, scale) if abs(r.imag) <= 1e-7 * s)


def _oracle(A: DenseTensor, kind: str, tol: float) -> list[EigenPair]:
    m, n = A.order, A.dim
    res_of = z_residual if kind == "Z" else h_residual
    lam_of = _z_lambda if kind == "Z" else _h_lambda
    cands = []
    if n == 1:
        a = float(A.data.ravel()[0])
        cands.append(np.array([1.0]))
        if kind == "Z":
            cands.append(np.array([-1.0]))
    else:
        y1, y2 = _row_polys(A)
        p = m - 1 if kind == "H" else 1
        shifted = np.zeros(max(y1.size, y2.size + p))
        shifted[: y1.size] += y1
        shifted[p : p + y2.size] -= y2
        if np.allclose(shifted, 0, atol=1e-14 * (1 + np.abs(A.data).max())):
            raise _Degenerate()
        # x = (1, 0) is an eigenvector iff a[1, 0, ..., 0] == 0
        if A.data[(1,) + (0,) * (m - 1)] == 0:
            cands += [np.array([1.0, 0.0]), np.array([-1.0, 0.0])]
        for t in _real_roots(shifted):
            v = np.array([t, 1.0]) / math.hypot(t, 1.0)
            cands += [v, -v]
    pairs = []
    for x in cands:
        lam = lam_of(A, x)
        if res_of(A, lam, x) > tol:
            polished = _newton(A, x, kind, tol)
            if polished is None:
                continue
            lam, x, _ = polished
        pairs.append(EigenPair(lam, _canonical(x, m), kind, res_of(A, lam, x), True))
    if not pairs:
        raise NonConvergence(f"polynomial enumeration left no {kind}-pair within {tol}")
    return _dedupe(pairs)


def h_eigenpairs_oracle(A: DenseTensor, tol: float = 1e-10) -> list[EigenPair]:
    """Every real H-eigenpair of a symmetric tensor with n <= 2."""
    if A.dim > 2:
        raise ValueError("exact enumeration is only implemented for n <= 2")
    return _oracle(A, "H", tol)


def z_eigenpairs_oracle(A: DenseTensor, tol: float = 1e-10) -> list[EigenPair]:
    """Every real Z-eigenpair of a symmetric tensor with n <= 2."""
    if A.dim > 2:
        raise ValueError("exact enumeration is only implemented for n <= 2")
    return _oracle(A, "Z", tol)


# -- extremes and definiteness -------------------------------------------------

@dataclass
class ExtremeZ:
    lambda_max: float
    lambda_min: float
    argmax: np.ndarray
    argmin: np.ndarray
    symmetrized: bool = False
    certified: bool = False

    def to_dict(self) -> dict:
        return {"lambda_max": self.lambda_max, "lambda_min": self.lambda_min,
                "argmax": [float(v) for v in self.argmax],
                "argmin": [float(v) for v in self.argmin],
                "symmetrized": self.symmetrized, "certified": self.certified}


def extreme_z_values(A: DenseTensor, cfg: EigenConfig | None = None) -> ExtremeZ:
    """Largest and smallest Z-eigenvalue, i.e. the extremes of A x^m on x^T x = 1.

    Exact for n <= 2 (polynomial enumeration), otherwise the best values
    reached by the multistart search.
    """
    cfg = cfg or EigenConfig()
    S, flagged = _prepare(A)
    certified = False
    pairs = None
    if S.dim <= 2:
        try:
            pairs = z_eigenpairs_oracle(S, cfg.tol)
            certified = True
        except (_Degenerate, NonConvergence):
            pairs = None
    if pairs is None:
        pairs = z_eigenpairs(S, cfg)
    hi = max(pairs, key=lambda p: p.lam)
    lo = min(pairs, key=lambda p: p.lam)
    return ExtremeZ(hi.lam, lo.lam, hi.x, lo.x, flagged, certified)


@dataclass
class DefinitenessVerdict:
    status: str
    min_z_value: float | None
    min_h_estimate: float | None
    certified: bool
    symmetrized: bool = False

    def to_dict(self) -> dict:
        return {"status": self.status,
                "evidence": {"min_z_value": self.min_z_value,
                             "min_h_estimate": self.min_h_estimate,
                             "certified": self.certified},
                "symmetrized": self.symmetrized}


def definiteness_check(A: DenseTensor, cfg: EigenConfig | None = None) -> DefinitenessVerdict:
    """Positive (semi-)definiteness from the sign of the smallest Z-eigenvalue.

    Values within ``cfg.definite_tol`` of zero count as zero.  Odd orders are
    reported as not applicable.
    """
    cfg = cfg or EigenConfig()
    if A.order % 2:
        return DefinitenessVerdict("not_applicable_odd_order", None, None, False)
    ext = extreme_z_values(A, cfg)
    S, _ = _prepare(A)
    try:
        min_h = min(p.lam for p in h_eigenpairs(S, cfg))
    except NonConvergence:
        min_h = None
    lo = ext.lambda_min
    if lo > cfg.definite_tol:
        status = "positive_definite"
    elif lo >= -cfg.definite_tol:
        status = "positive_semidefinite"
    else:
        status = "indefinite"
    return DefinitenessVerdict(status, lo, min_h, ext.certified, ext.symmetrized)
