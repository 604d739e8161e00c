"""P / P0 analysis: the scaling operators T and F, the min-max quantity
alpha over the infinity-norm unit sphere, P classification with refutation
witnesses, and positive diagonal scaling certificates.

alpha(op) = min over ||x||_inf = 1 of max_i x_i op(x)_i, where

    T(x) = ||x||_2^(2-m) A x^(m-1)          (any m, T(0) = 0)
    F(x) = (A x^(m-1))^[1/(m-1)]            (even m only)

No closed form exists, so two estimators are offered.  ``grid`` is exhaustive
over the lattice {-1, -1+h, ..., 1}^n restricted to the sphere, which is the
union of the 2n faces {x_k = +-1}; its value is the exact lattice minimum and
is flagged certified.  ``multistart`` is a seeded local search and is never
certified.  Neither is a certificate for the continuous problem; the
difference is bounded through the Lipschitz constant of the objective (see
:func:`grid_band`).
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import InternalDisagreement, NoPositiveProduct, OddOrderUnsupported, ResourceLimit
from .generators import rng_for
from .structure_checks import row_norm_bound
from .tensor_core import (
    DenseTensor,
    as_vector,
    componentwise_power,
    contract_batch,
    contract_once,
    is_symmetric,
)

DEFAULT_MAX_EVALS = 10**8


def max_evals_from_env() -> int:
    raw = os.environ.get("TENSTRUCT_MAX_EVALS")
    return int(float(raw)) if raw else DEFAULT_MAX_EVALS


@dataclass(frozen=True)
class AlphaConfig:
    method: str = "grid"
    h: float = 0.05
    starts: int = 64
    iters: int = 500
    seed: int = 1
    max_evals: int | None = None
    chunk: int = 1 << 16

    def __post_init__(self):
        if self.method not in ("grid", "multistart"):
            raise ValueError(f"method must be 'grid' or 'multistart', got {self.method!r}")
        if not (0 < self.h <= 2):
            raise ValueError(f"grid resolution must lie in (0, 2], got {self.h}")
        if self.starts < 1 or self.iters < 1:
            raise ValueError("starts and iters must be positive")

    @property
    def eval_cap(self) -> int:
        return self.max_evals if self.max_evals is not None else max_evals_from_env()

    @classmethod
    def from_dict(cls, doc: dict) -> "AlphaConfig":
        known = {"method", "h", "starts", "iters", "seed", "max_evals"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return {"method": self.method, "h": self.h, "starts": self.starts,
                "iters": self.iters, "seed": self.seed, "max_evals": self.eval_cap}


# -- operators ---------------------------------------------------------------

def t_operator(A: DenseTensor, x) -> np.ndarray:
    x = as_vector(x, A.dim)
    if not np.any(x):
        return np.zeros(A.dim)
    y = contract_once(A, x)
    if A.order == 2:
        return y
    return float(x @ x) ** ((2 - A.order) / 2) * y


def f_operator(A: DenseTensor, x) -> np.ndarray:
    if A.order % 2:
        raise OddOrderUnsupported("F is only defined for even order")
    x = as_vector(x, A.dim)
    return componentwise_power(contract_once(A, x), Fraction(1, A.order - 1))


def _operator(op: str):
    if op == "T":
        return t_operator
    if op == "F":
        return f_operator
    raise ValueError(f"operator must be 'T' or 'F', got {op!r}")


def max_product(A: DenseTensor, x, op: str = "T") -> float:
    """max_i x_i op(x)_i at a single point."""
    x = as_vector(x, A.dim)
    return float(np.max(x * _operator(op)(A, x)))


def _signed_root_batch(Y: np.ndarray, p: int) -> np.ndarray:
    if p == 1:
        return Y
    if p == 3:
        return np.cbrt(Y)
    return np.sign(Y) * np.abs(Y) ** (1.0 / p)


def _products_batch(A: DenseTensor, X: np.ndarray, op: str) -> np.ndarray:
    Y = contract_batch(A, X)
    m = A.order
    if op == "F":
        return X * _signed_root_batch(Y, m - 1)
    if m != 2:
        scale = np.einsum("ij,ij->i", X, X) ** ((2 - m) / 2)
        Y = Y * scale[:, None]
    return X * Y


# -- resolution bounds -------------------------------------------------------

def objective_lipschitz(A: DenseTensor) -> float:
    """Lipschitz constant (w.r.t. the inf-norm) of x -> max_i x_i T(x)_i on the sphere.

    With R the max absolute row sum, each x_i (A x^(m-1))_i has gradient of
    l1-norm <= m R on the unit cube, and ||x||_2^(2-m) has gradient of l1-norm
    <= (m-2) sqrt(n) on the sphere faces where ||x||_2 >= 1.
    """
    R = row_norm_bound(A).t_bound
    m, n = A.order, A.dim
    return R * (m + (m - 2) * math.sqrt(n))


def grid_band(A: DenseTensor, op: str, h: float) -> float:
    """Width of the band around 0 inside which a grid sign may be unreliable.

    For T this is 2 L h.  F is only Hoelder continuous (exponent 1/(m-1));
    the same construction with the Hoelder modulus is used instead.
    """
    if op == "T":
        return 2 * objective_lipschitz(A) * h
    if A.order % 2:
        raise OddOrderUnsupported("F is only defined for even order")
    R = row_norm_bound(A).t_bound
    p = A.order - 1
    modulus = h * R ** (1 / p) + 2 ** (1 - 1 / p) * ((A.order - 1) * R * h) ** (1 / p)
    return 2 * modulus


# -- lattice on the infinity sphere ------------------------------------------

def lattice_steps(h: float) -> int:
    """Number of lattice intervals on [-1, 1]; effective resolution is 2 / steps."""
    N = round(2 / h)
    if N < 1 or abs(2 / h - N) > 1e-9 * max(N, 1):
        N = math.ceil(2 / h)
    return max(N, 1)


def lattice_size(n: int, N: int, halved: bool) -> int:
    signs = 1 if halved else 2
    return signs * sum((N - 1) ** k * (N + 1) ** (n - 1 - k) for k in range(n))


def _lattice_chunks(n: int, N: int, halved: bool, chunk: int):
    """Yield (B, n) arrays that together cover every lattice point on the sphere once.

    Face (k, s) holds the points with x_k = s and |x_j| < 1 for j < k, so each
    sphere point belongs to exactly one face.  With ``halved`` only s = +1 is
    visited (the caller exploits x -> -x symmetry).
    """
    vals = -1.0 + 2.0 * np.arange(N + 1) / N
    vals[-1] = 1.0
    interior = vals[1:-1]
    signs = (1.0,) if halved else (-1.0, 1.0)
    for k in range(n):
        axes = [interior if j < k else vals for j in range(n) if j != k]
        others = [j for j in range(n) if j != k]
        if any(len(a) == 0 for a in axes):
            continue
        # trailing axes form a dense block; leading axes are looped over
        split = len(axes)
        size = 1
        while split > 0 and size * len(axes[split - 1]) <= chunk:
            split -= 1
            size *= len(axes[split])
        tail = axes[split:]
        if tail:
            block = np.stack(np.meshgrid(*tail, indexing="ij"), axis=-1).reshape(-1, len(tail))
        else:
            block = np.zeros((1, 0))
        for s in signs:
            for head in itertools.product(*axes[:split]):
                X = np.empty((block.shape[0], n))
                X[:, k] = s
                for pos, j in enumerate(others[:split]):
                    X[:, j] = head[pos]
                X[:, others[split:]] = block
                yield X


def _lexmin(rows: np.ndarray) -> np.ndarray:
    order = np.lexsort(rows.T[::-1])
    return rows[order[0]]


# -- alpha -------------------------------------------------------------------

@dataclass
class AlphaEstimate:
    value: float
    minimizer: np.ndarray
    operator: str
    method: str
    certified: bool
    resolution: float | None = None
    starts: int | None = None
    iters: int | None = None
    seed: int | None = None
    evaluations: int = 0
    band: float | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "minimizer": [float(v) for v in self.minimizer],
            "operator": self.operator,
            "method": self.method,
            "certified": self.certified,
            "resolution": self.resolution,
            "starts": self.starts,
            "iters": self.iters,
            "seed": self.seed,
            "evaluations": self.evaluations,
            "band": self.band,
        }


def _grid_alpha(A: DenseTensor, op: str, cfg: AlphaConfig) -> AlphaEstimate:
    n = A.dim
    N = lattice_steps(cfg.h)
    even = A.order % 2 == 0  # objective is even in x for T and F alike
    total = lattice_size(n, N, halved=even)
    if total > cfg.eval_cap:
        raise ResourceLimit(
            f"grid with h={2 / N:g} needs {total} evaluations, cap is {cfg.eval_cap}"
        )
    vals = -1.0 + 2.0 * np.arange(N + 1) / N
    vals[-1] = 1.0
    rows = np.ascontiguousarray(A.rows())
    code = _kernels.OP_F if op == "F" else _kernels.OP_T
    best, arg, count = math.inf, None, 0
    for k in range(n):
        for s in ((1.0,) if even else (-1.0, 1.0)):
            v, first, last, c = _kernels.face_minimum(rows, A.order, vals, k, s, code)
            count += c
            if c == 0 or v > best:
                continue
            # with mirroring, the reflected tie set has -last as its lexmin
            ties = np.vstack([first, -last]) if even else first[None, :]
            cand = _lexmin(ties if v < best else np.vstack([ties, arg]))
            best, arg = v, cand
    h = 2 / N
    return AlphaEstimate(
        value=max_product(A, arg, op),
        minimizer=arg,
        operator=op,
        method="grid",
        certified=True,
        resolution=h,
        evaluations=count,
        band=grid_band(A, op, h),
    )


def _descend(A: DenseTensor, op: str, x: np.ndarray, iters: int) -> tuple[np.ndarray, float, int]:
    """Projected coordinate descent on the inf-sphere with step halving."""
    n = A.dim
    g = _products_batch(A, x[None, :], op).max()
    step = 0.5
    evals = 1
    eye = np.eye(n)
    for _ in range(iters):
        cand = np.vstack([x + step * eye, x - step * eye])
        np.clip(cand, -1.0, 1.0, out=cand)
        norms = np.abs(cand).max(axis=1)
        keep = norms > 0
        cand = cand[keep] / norms[keep, None]
        vals = _products_batch(A, cand, op).max(axis=1)
        evals += cand.shape[0]
        j = int(np.argmin(vals))
        if vals[j] < g:
            x, g = cand[j], vals[j]
        else:
            step /= 2
            if step < 1e-12:
                break
    return x, g, evals


def _multistart_alpha(A: DenseTensor, op: str, cfg: AlphaConfig) -> AlphaEstimate:
    rng = rng_for(cfg.seed)
    n = A.dim
    best_x, best_g = None, math.inf
    evals = 0
    for _ in range(cfg.starts):
        x0 = rng.uniform(-1.0, 1.0, n)
        k = int(rng.integers(n))
        x0[k] = 1.0 if x0[k] >= 0 else -1.0
        x, g, e = _descend(A, op, x0, cfg.iters)
        evals += e
        if g < best_g or (g == best_g and tuple(x) < tuple(best_x)):
            best_x, best_g = x, g
    x = best_x / np.abs(best_x).max()
    return AlphaEstimate(
        value=max_product(A, x, op),
        minimizer=x,
        operator=op,
        method="multistart",
        certified=False,
        starts=cfg.starts,
        iters=cfg.iters,
        seed=cfg.seed,
        evaluations=evals,
    )


def alpha_estimate(A: DenseTensor, operator: str = "T", cfg: AlphaConfig | None = None) -> AlphaEstimate:
    """Estimate alpha(T) or alpha(F) of A.

    Raises OddOrderUnsupported for F with odd m and ResourceLimit when the
    grid would exceed ``cfg.eval_cap`` evaluations.
    """
    cfg = cfg or AlphaConfig()
    _operator(operator)
    if operator == "F" and A.order % 2:
        raise OddOrderUnsupported("alpha(F) needs even order")
    if cfg.method == "grid":
        return _grid_alpha(A, operator, cfg)
    return _multistart_alpha(A, operator, cfg)


# -- P / P0 decisions --------------------------------------------------------

def _refutes_p0(x: np.ndarray, products: np.ndarray) -> bool:
    support = x != 0
    return bool(support.any() and np.all(products[support] < 0))


def _refutes_p(x: np.ndarray, products: np.ndarray) -> bool:
    return bool(np.any(x != 0) and products.max() <= 0)


def point_products(A: DenseTensor, x) -> np.ndarray:
    """x_i (A x^(m-1))_i for every i."""
    x = as_vector(x, A.dim)
    return x * contract_once(A, x)


@dataclass
class GridPDecision:
    """Definition-based P / P0 decision over every lattice point on the sphere."""

    cls: str
    p_counterexample: np.ndarray | None
    p0_counterexample: np.ndarray | None
    resolution: float
    points: int


def grid_p_decision(A: DenseTensor, h: float, max_evals: int | None = None,
                    chunk: int = 1 << 16) -> GridPDecision:
    """Check the P and P0 definitions pointwise on the lattice.

    Independent of alpha: it never forms the max-product minimum, only the
    pointwise predicates "some product > 0" and "some product >= 0 on the
    support".
    """
    N = lattice_steps(h)
    even = A.order % 2 == 0
    cap = max_evals if max_evals is not None else max_evals_from_env()
    if lattice_size(A.dim, N, even) > cap:
        raise ResourceLimit(f"grid with h={2 / N:g} exceeds the evaluation cap {cap}")
    p_bad = p0_bad = None
    count = 0
    for X in _lattice_chunks(A.dim, N, even, chunk):
        P = X * contract_batch(A, X)
        count += X.shape[0]
        if p_bad is None:
            hit = np.flatnonzero(P.max(axis=1) <= 0)
            if hit.size:
                p_bad = X[hit[0]].copy()
        if p0_bad is None:
            ok = np.where(X != 0, P >= 0, False).any(axis=1)
            hit = np.flatnonzero(~ok)
            if hit.size:
                p0_bad = X[hit[0]].copy()
    cls = "P" if p_bad is None else ("P0_NOT_P" if p0_bad is None else "NOT_P0")
    return GridPDecision(cls, p_bad, p0_bad, 2 / N, count)


@dataclass
class Refutation:
    witness: np.ndarray | None = None
    weak_witness: np.ndarray | None = None
    source: str | None = None
    candidates: int = 0


def _sign_patterns(n: int):
    """Vectors in {-1, 0, 1}^n: larger supports first, then lexicographic
    support, then sign patterns with +1 before -1."""
    for r in range(n, 0, -1):
        for support in itertools.combinations(range(n), r):
            for signs in itertools.product((1.0, -1.0), repeat=r):
                x = np.zeros(n)
                x[list(support)] = signs
                yield x


def refutation_search(A: DenseTensor, cfg: AlphaConfig | None = None,
                      extra: list | tuple = (), max_pattern_dim: int = 8) -> Refutation:
    """Look for x with all products negative on its support (refutes P0) or
    with max product <= 0 (refutes P).

    Candidates, in priority order: the {-1, 0, 1}^n patterns (n <= 8), the
    caller's ``extra`` points, a Z-eigenvector for odd symmetric A (its
    products are lambda x_i^2, all of one sign, and x -> -x flips the sign
    when m is odd), and finally seeded local minima of the T objective
    together with their negations.
    """
    cfg = cfg or AlphaConfig()
    out = Refutation()

    def consider(x, source):
        x = np.asarray(x, dtype=float)
        if not np.any(x):
            return False
        out.candidates += 1
        p = point_products(A, x)
        if out.weak_witness is None and _refutes_p(x, p):
            out.weak_witness = x.copy()
        if _refutes_p0(x, p):
            out.witness = x.copy()
            out.source = source
            if out.weak_witness is None:
                out.weak_witness = x.copy()
            return True
        return False

    if A.dim <= max_pattern_dim:
        pats = np.array(list(_sign_patterns(A.dim)))
        P = pats * contract_batch(A, pats)
        strict = np.where(pats != 0, P < 0, True).all(axis=1)
        weak = P.max(axis=1) <= 0
        out.candidates += len(pats)
        if weak.any():
            out.weak_witness = pats[np.argmax(weak)].copy()
        if strict.any():
            # re-verify through the single-point path
            if consider(pats[np.argmax(strict)], "sign pattern"):
                return out

    for x in extra:
        if consider(x, "supplied point"):
            return out

    if A.order % 2 and is_symmetric(A):
        from .spectral import EigenConfig, extreme_z_values

        ext = extreme_z_values(A, EigenConfig(starts=8, seed=cfg.seed))
        for x in (ext.argmax, -ext.argmax, ext.argmin, -ext.argmin):
            if consider(x, "Z-eigenvector"):
                return out

    ms = replace(cfg, method="multistart", starts=min(cfg.starts, 16), iters=min(cfg.iters, 200))
    rng = rng_for(ms.seed + 7919)
    for _ in range(ms.starts):
        x0 = rng.uniform(-1.0, 1.0, A.dim)
        x, _, _ = _descend(A, "T", x0 / np.abs(x0).max(), ms.iters)
        for cand in (x, -x):
            if consider(cand, "local search"):
                return out
    return out


@dataclass
class PVerdict:
    cls: str
    witness: np.ndarray | None
    alpha_T: AlphaEstimate
    certified: bool
    label: str
    witness_source: str | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "class": self.cls,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "witness_source": self.witness_source,
            "certified": self.certified,
            "label": self.label,
            "alpha_T": self.alpha_T.to_dict(),
            "notes": list(self.notes),
        }


def p_classify(A: DenseTensor, cfg: AlphaConfig | None = None) -> PVerdict:
    """Classify A as P, P0_NOT_P or NOT_P0.

    NOT_P0 needs a verified witness with every product on its support
    negative.  P needs a positive grid alpha(T) and a failed refutation
    search.  Everything else is P0_NOT_P, with a point whose max product is
    <= 0 attached.  "certified" means certified on the lattice only.
    """
    cfg = cfg or AlphaConfig()
    notes = []
    try:
        alpha = alpha_estimate(A, "T", cfg)
    except ResourceLimit:
        alpha = alpha_estimate(A, "T", replace(cfg, method="multistart"))
        notes.append("grid exceeded the evaluation cap; fell back to multistart")
    extra = [alpha.minimizer] if alpha.value <= 0 else []
    ref = refutation_search(A, cfg, extra=extra)
    label = "certified-on-grid" if alpha.certified else "empirical"

    if ref.witness is not None:
        cls, witness, source = "NOT_P0", ref.witness, ref.source
    elif alpha.value > 0 and ref.weak_witness is None:
        cls, witness, source = "P", None, None
        if A.order % 2 and not is_symmetric(A):
            notes.append("odd-order nonsymmetric input: failure to refute is inconclusive")
    else:
        witness = ref.weak_witness if ref.weak_witness is not None else alpha.minimizer
        cls, source = "P0_NOT_P", "alpha minimizer" if ref.weak_witness is None else "search"

    alpha_cls = "P" if alpha.value > 0 else ("P0_NOT_P" if alpha.value == 0 else "NOT_P0")
    if alpha_cls != cls:
        notes.append(f"sign of alpha(T) suggests {alpha_cls}, definition-based search gives {cls}")
    certified = True if cls == "NOT_P0" else alpha.certified
    verdict = PVerdict(cls, witness, alpha, certified, label, source, notes)
    _verify_witness(A, verdict)
    return verdict


def _verify_witness(A: DenseTensor, v: PVerdict) -> None:
    if v.witness is None:
        if v.cls != "P":
            raise InternalDisagreement(f"{v.cls} verdict without a witness")
        return
    p = point_products(A, v.witness)
    ok = _refutes_p0(v.witness, p) if v.cls == "NOT_P0" else _refutes_p(v.witness, p)
    if not ok:
        raise InternalDisagreement(f"{v.cls} witness fails re-evaluation")


# -- positive diagonal scaling ------------------------------------------------

@dataclass
class ScalingCertificate:
    x: np.ndarray
    k: int
    epsilon: float
    D: np.ndarray
    product: float


def scaling_certificate(A: DenseTensor, x) -> ScalingCertificate:
    """Positive diagonal D with x^T D (A x^(m-1)) > 0.

    D has 1 at the smallest index k of the largest product x_k (A x^(m-1))_k
    and eps elsewhere, eps = min(1, p_k / (2 |sum_{j != k} p_j| + 1)), which
    keeps at least half of p_k.  Raises NoPositiveProduct when no product is
    positive: x then refutes the P property.
    """
    x = as_vector(x, A.dim)
    p = point_products(A, x)
    if not np.any(x) or p.max() <= 0:
        raise NoPositiveProduct("no index has x_i (A x^(m-1))_i > 0", x=x)
    k = int(np.argmax(p))
    rest = math.fsum(np.delete(p, k))
    eps = min(1.0, p[k] / (2 * abs(rest) + 1))
    D = np.full(A.dim, eps)
    D[k] = 1.0
    product = math.fsum(D * p)
    if not product > 0:
        raise InternalDisagreement("scaling certificate product is not positive")
    return ScalingCertificate(x, k, eps, D, product)
