"""Membership tests for Z, B, B0 and (strictly) diagonally dominated tensors.

Every inequality is decided in exact arithmetic.  Finite doubles are dyadic
rationals, so a tensor (together with the tolerance) is rescaled by a common
power of two into Python integers and all sums and comparisons are done on
those.  Reported real-valued diagnostics are converted back to floats.

Tolerance semantics: with ``eps >= 0`` a strict inequality ``lhs > rhs`` is
read as ``lhs - rhs > eps`` and a weak one as ``lhs - rhs >= -eps``.  The
row-sum conditions of the B test are measured on the row average
``sum / n**(m-1)``, which keeps the definition form and the beta form
equivalent for every eps.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import IndexOutOfRange, InternalDisagreement
from .tensor_core import DenseTensor


@dataclass(frozen=True)
class Tolerance:
    eps: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise ValueError(f"tolerance must be finite and >= 0, got {self.eps}")


def _as_tol(tol) -> Tolerance:
    if tol is None:
        return Tolerance()
    if isinstance(tol, Tolerance):
        return tol
    return Tolerance(float(tol))


@dataclass
class _ExactRows:
    """Integer image of a tensor: value = int / scale."""

    rows: list[list[int]]
    diag_pos: list[int]
    eps: int
    scale: int
    order: int
    dim: int

    @property
    def width(self) -> int:
        return self.dim ** (self.order - 1)

    def off(self, i: int) -> list[int]:
        row = self.rows[i]
        return row[: self.diag_pos[i]] + row[self.diag_pos[i] + 1 :]

    def to_float(self, v: int) -> float:
        return v / self.scale  # int/int true division is correctly rounded

    def tuple_of(self, i: int, pos: int) -> tuple[int, ...]:
        rest = np.unravel_index(pos, (self.dim,) * (self.order - 1))
        return (i,) + tuple(int(r) for r in rest)


def _dyadic(values: np.ndarray) -> tuple[list[int], int]:
    """Integers k_j and a power of two s with values[j] == k_j / s exactly."""
    ratios = [float(v).as_integer_ratio() for v in values]
    scale = max(q for _, q in ratios)
    return [p * (scale // q) for p, q in ratios], scale


def _exact(A: DenseTensor, tol: Tolerance) -> _ExactRows:
    n, m = A.dim, A.order
    flat = np.append(A.data.ravel(), tol.eps)
    ints, scale = _dyadic(flat)
    width = n ** (m - 1)
    rows = [ints[i * width : (i + 1) * width] for i in range(n)]
    # position of (i, i, ..., i) inside row i
    step = sum(n**k for k in range(m - 1))
    diag_pos = [i * step for i in range(n)]
    return _ExactRows(rows, diag_pos, ints[-1], scale, m, n)


def is_z_tensor(A: DenseTensor, tol=None) -> bool:
    """True iff every off-diagonal entry is <= eps."""
    ex = _exact(A, _as_tol(tol))
    return all(b <= ex.eps for i in range(ex.dim) for b in ex.off(i))


def _dominance_rows(ex: _ExactRows, strict: bool) -> list[bool]:
    out = []
    for i in range(ex.dim):
        gap = ex.rows[i][ex.diag_pos[i]] - sum(abs(b) for b in ex.off(i))
        out.append(gap > ex.eps if strict else gap >= -ex.eps)
    return out


def diagonal_dominance(A: DenseTensor, strict: bool = False, tol=None) -> bool:
    """a[i..i] (>, >=) sum of |a[i, i2..im]| over the rest of row i, every i."""
    return all(_dominance_rows(_exact(A, _as_tol(tol)), strict))


def beta_quantity(B: DenseTensor, i: int) -> float:
    """max{0, off-diagonal entries of row i}."""
    if not 0 <= i < B.dim:
        raise IndexOutOfRange(f"row {i} outside I_{B.dim}")
    row = B.rows()[i]
    pos = i * sum(B.dim**k for k in range(B.order - 1))
    off = np.delete(row, pos)
    return float(max(0.0, off.max())) if off.size else 0.0


@dataclass(frozen=True)
class BVerdict:
    verdict: str  # "B" | "B0_NOT_B" | "NEITHER"
    violation: dict | None = None


def _b_row_definition(ex: _ExactRows, i: int, strict: bool):
    """First violation of the definition in row i, or None."""
    N = ex.width
    row = ex.rows[i]
    S = sum(row)
    bound = N * ex.eps
    if not (S > bound if strict else S >= -bound):
        return {"row": i, "index": None, "reason": "row sum"}
    for pos, b in enumerate(row):
        if pos == ex.diag_pos[i]:
            continue
        gap = S - N * b
        if not (gap > bound if strict else gap >= -bound):
            return {"row": i, "index": ex.tuple_of(i, pos), "reason": "row average vs entry"}
    return None


def _b_row_beta(ex: _ExactRows, i: int, strict: bool) -> bool:
    N = ex.width
    off = ex.off(i)
    beta = max([0] + off)
    gap = sum(ex.rows[i]) - N * beta
    return gap > N * ex.eps if strict else gap >= -N * ex.eps


def _b_verdict(ex: _ExactRows) -> BVerdict:
    first = {}
    ok = {}
    for strict in (True, False):
        by_def = [_b_row_definition(ex, i, strict) for i in range(ex.dim)]
        by_beta = [_b_row_beta(ex, i, strict) for i in range(ex.dim)]
        for i in range(ex.dim):
            if (by_def[i] is None) != by_beta[i]:
                raise InternalDisagreement(
                    f"definition and beta forms disagree on row {i} (strict={strict})"
                )
        ok[strict] = all(v is None for v in by_def)
        first[strict] = next((v for v in by_def if v is not None), None)
    if ok[True] and not ok[False]:
        raise InternalDisagreement("B but not B0")
    if ok[True]:
        return BVerdict("B")
    if ok[False]:
        return BVerdict("B0_NOT_B", _public_violation(first[True]))
    return BVerdict("NEITHER", _public_violation(first[False]))


def _public_violation(v: dict | None) -> dict | None:
    if v is None:
        return None
    idx = None if v["index"] is None else [k + 1 for k in v["index"]]
    return {"row": v["row"] + 1, "index": idx, "reason": v["reason"]}


def b_classify(B: DenseTensor, tol=None) -> BVerdict:
    """B / B0_NOT_B / NEITHER, with the first violation (one-based indices).

    Both the defining inequalities and the equivalent beta-quantity form are
    evaluated; any disagreement raises InternalDisagreement.
    """
    return _b_verdict(_exact(B, _as_tol(tol)))


def _entry_rows(ex: _ExactRows, strict: bool) -> list[bool]:
    out = []
    for i in range(ex.dim):
        d = ex.rows[i][ex.diag_pos[i]]
        off = ex.off(i)
        beta = max([0] + off)
        neg = sum(-b for b in off if b < 0)
        big = max([abs(b) for b in off], default=0)
        gaps = (d - beta, d - neg, d - big)
        out.append(all(g > ex.eps if strict else g >= -ex.eps for g in gaps))
    return out


def entry_necessary_conditions(B: DenseTensor, mode: str = "B", tol=None) -> bool:
    """Entry-level conditions every B (mode "B") or B0 (mode "B0") tensor meets.

    For each row: the diagonal dominates max{0, off entries}, the total
    magnitude of the negative off entries, and every |off entry|.
    """
    if mode not in ("B", "B0"):
        raise ValueError(f"mode must be 'B' or 'B0', got {mode!r}")
    return all(_entry_rows(_exact(B, _as_tol(tol)), strict=mode == "B"))


@dataclass(frozen=True)
class RowNormBound:
    t_bound: float
    f_bound: float | None


def row_norm_bound(A: DenseTensor) -> RowNormBound:
    """Max absolute row sum, and its (m-1)-th root when m is even."""
    t = max(math.fsum(np.abs(row)) for row in A.rows())
    f = t ** (1.0 / (A.order - 1)) if A.order % 2 == 0 else None
    return RowNormBound(t, f)


@dataclass
class ClassificationReport:
    is_Z: bool
    is_B: bool
    is_B0: bool
    strictly_diag_dominated: bool
    diag_dominated: bool
    entry_conditions_B: bool
    entry_conditions_B0: bool
    per_row: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    z_dominance_consistent: bool = True
    eps: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def classify(A: DenseTensor, tol=None) -> ClassificationReport:
    """Run every structural check and cross-check the results.

    At eps = 0 the following must hold or InternalDisagreement is raised:
    B implies the B entry conditions, B0 implies the B0 entry conditions,
    and for a Z tensor, B <=> strict dominance and B0 <=> weak dominance.
    """
    tol = _as_tol(tol)
    ex = _exact(A, tol)
    n, N = ex.dim, ex.width
    is_z = all(b <= ex.eps for i in range(n) for b in ex.off(i))
    strict_rows = _dominance_rows(ex, strict=True)
    weak_rows = _dominance_rows(ex, strict=False)
    entry_b = _entry_rows(ex, strict=True)
    entry_b0 = _entry_rows(ex, strict=False)
    bv = _b_verdict(ex)
    is_b = bv.verdict == "B"
    is_b0 = bv.verdict in ("B", "B0_NOT_B")

    per_row, failures = [], []
    for i in range(n):
        row = ex.rows[i]
        off = ex.off(i)
        S = sum(row)
        per_row.append(
            {
                "i": i + 1,
                "row_sum": ex.to_float(S),
                "beta": ex.to_float(max([0] + off)),
                "threshold": S / (ex.scale * N),
                "offdiag_abs_sum": ex.to_float(sum(abs(b) for b in off)),
            }
        )
        for name, strict in (("B", True), ("B0", False)):
            v = _b_row_definition(ex, i, strict)
            if v is not None:
                failures.append({"check": name, **_public_violation(v)})
        if not strict_rows[i]:
            failures.append(
                {"check": "strict_dominance", "row": i + 1, "index": None,
                 "reason": "diagonal <= off-diagonal absolute sum"}
            )
        if not weak_rows[i]:
            failures.append(
                {"check": "dominance", "row": i + 1, "index": None,
                 "reason": "diagonal < off-diagonal absolute sum"}
            )
        for pos, b in enumerate(row):
            if pos != ex.diag_pos[i] and b > ex.eps:
                failures.append(
                    {"check": "Z", "row": i + 1,
                     "index": [k + 1 for k in ex.tuple_of(i, pos)],
                     "reason": "positive off-diagonal entry"}
                )
                break

    report = ClassificationReport(
        is_Z=is_z,
        is_B=is_b,
        is_B0=is_b0,
        strictly_diag_dominated=all(strict_rows),
        diag_dominated=all(weak_rows),
        entry_conditions_B=all(entry_b),
        entry_conditions_B0=all(entry_b0),
        per_row=per_row,
        failures=failures,
        eps=tol.eps,
    )
    report.z_dominance_consistent = (not is_z) or (
        report.is_B == report.strictly_diag_dominated
        and report.is_B0 == report.diag_dominated
    )
    _cross_check(report)
    return report


def _cross_check(r: ClassificationReport) -> None:
    if r.strictly_diag_dominated and not r.diag_dominated:
        raise InternalDisagreement("strict dominance without weak dominance")
    if r.eps != 0:
        return
    if r.is_B and not r.entry_conditions_B:
        raise InternalDisagreement("B tensor violates the B entry conditions")
    if r.is_B0 and not r.entry_conditions_B0:
        raise InternalDisagreement("B0 tensor violates the B0 entry conditions")
    if not r.z_dominance_consistent:
        raise InternalDisagreement("Z tensor: B/B0 verdict disagrees with dominance")
