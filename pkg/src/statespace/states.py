"""The convex set of state operators and its face structure.

A state operator is a positive Hermitian matrix with unit trace.  Faces of
the convex set are in order-preserving bijection with projections: a state T
belongs to the face of projection P exactly when T = P T P.  The smallest
face containing T is given by its support projection.  Extremal states are
the rank-one projectors.

Convex-component analysis asks for the largest w such that t2 - w*t1 stays
positive; the answer is computed in closed form on the support of t2, and an
eigenbasis diagnostic (``sup_ratio``) gives the complementary obstruction:
when t1 has weight where t2 has none, the ratio diverges and t1 cannot be a
convex component of t2 at any positive weight.

All values are immutable; every operation returns new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    CODE_BAD_BASIS,
    CODE_NEGATIVE_EIGENVALUE,
    CODE_NOT_PROJECTION,
    CODE_NOT_REPAIRABLE,
    CODE_TRACE_DEVIATION,
    CODE_WEIGHT_SUM,
    CODE_ZERO_VECTOR,
    DimensionMismatchError,
    MatrixFormatError,
    ValidationError,
)

#: default construction tolerance on the smallest eigenvalue
DEFAULT_STATE_TOL = 1e-9
#: absolute tolerance on |trace - 1|
TRACE_ATOL = 1e-9
#: eigenvalues above this threshold count toward the rank (unit-trace
#: operators make an absolute threshold scale-free)
RANK_TOL = 1e-9
#: two states are considered equal below this max-entry distance
STATE_EQ_TOL = 1e-9
#: weights must sum to 1 within this tolerance
WEIGHT_ATOL = 1e-12
#: diagonal terms at or below this are treated as numerically zero in ratios
RATIO_ZERO = 1e-12


@dataclass(frozen=True, eq=False)
class StateOperator:
    """Validated positive unit-trace Hermitian operator.

    Construct through :func:`new_state`, :func:`pure_state` or
    :func:`convex_combine`; the dataclass itself performs no validation.
    ``tol`` records the positivity tolerance used at construction.
    """

    matrix: np.ndarray
    tol: float = DEFAULT_STATE_TOL

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def isclose(self, other: "StateOperator", tol: float = STATE_EQ_TOL) -> bool:
        return states_close(self, other, tol)


def states_close(a: StateOperator, b: StateOperator, tol: float = STATE_EQ_TOL) -> bool:
    """State equality: max-entry distance at most ``tol``."""
    if a.dim != b.dim:
        return False
    return linalg.max_entry_distance(a.matrix, b.matrix) <= tol


def new_state(m, tol: float = DEFAULT_STATE_TOL, *, max_dim: int | None = None) -> StateOperator:
    """Validate a matrix as a state operator or raise a detailed violation.

    Checks, in order: Hermiticity (within 1e-10, symmetrizing what passes),
    positivity (min eigenvalue >= -tol) and unit trace (within 1e-9).  Each
    failure carries a distinct error code and the size of the violation.
    Near-valid inputs are rejected, never silently repaired; see
    :func:`repair_state` for the explicit repair mode.
    """
    sym = linalg.require_hermitian(linalg.as_matrix(m, max_dim=max_dim))
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    if min_eig < -tol:
        raise ValidationError(
            CODE_NEGATIVE_EIGENVALUE,
            f"positivity violation: min eigenvalue {min_eig:.6e} below -{tol:.1e}",
            amount=min_eig,
        )
    tr = np.trace(sym)
    deviation = abs(complex(tr) - 1.0)
    if deviation > TRACE_ATOL:
        raise ValidationError(
            CODE_TRACE_DEVIATION,
            f"trace violation: |trace - 1| = {deviation:.6e} exceeds {TRACE_ATOL:.1e}",
            amount=float(deviation),
        )
    return StateOperator(sym, float(tol))


@dataclass(frozen=True)
class RepairReport:
    """Corrections applied by :func:`repair_state`."""

    hermitian_defect: float
    clipped_weight: float
    trace_scale: float

    @property
    def was_repaired(self) -> bool:
        return self.clipped_weight > 0 or abs(self.trace_scale - 1.0) > 1e-15


def repair_state(m, tol: float = DEFAULT_STATE_TOL, *, max_dim: int | None = None) -> tuple[StateOperator, RepairReport]:
    """Clip negative eigenvalues to zero and renormalize the trace.

    Returns the repaired state together with a report of the applied
    correction.  Inputs that are not Hermitian within 1e-10, or whose
    positive part has no trace left, are rejected.
    """
    arr = linalg.as_matrix(m, max_dim=max_dim)
    defect = linalg.hermitian_defect(arr)
    sym = linalg.require_hermitian(arr)
    vals, vecs = np.linalg.eigh(sym)
    clipped = float(-np.minimum(vals, 0.0).sum())
    vals = np.maximum(vals, 0.0)
    total = float(vals.sum())
    if total <= 0.0:
        raise ValidationError(
            CODE_NOT_REPAIRABLE,
            "no positive part left to renormalize",
            amount=total,
        )
    vals = vals / total
    fixed = (vecs * vals) @ vecs.conj().T
    fixed = linalg.require_hermitian(fixed)
    report = RepairReport(hermitian_defect=defect, clipped_weight=clipped, trace_scale=1.0 / total)
    return StateOperator(fixed, float(tol)), report


def pure_state(v, tol: float = DEFAULT_STATE_TOL) -> StateOperator:
    """Rank-one projector |psi><psi| for psi = v / ||v||."""
    vec = np.asarray(v, dtype=np.complex128).reshape(-1)
    if not np.isfinite(vec).all():
        raise MatrixFormatError("vector entries must be finite")
    norm = float(np.linalg.norm(vec))
    if norm <= 1e-12:
        raise ValidationError(CODE_ZERO_VECTOR, "cannot normalize a (near-)zero vector", amount=norm)
    psi = vec / norm
    mat = np.outer(psi, psi.conj())
    return StateOperator(linalg.require_hermitian(mat), float(tol))


@dataclass(frozen=True, eq=False)
class FaceHandle:
    """A face of the state space, held as its unique projection."""

    projection: np.ndarray
    rank: int

    @property
    def dim(self) -> int:
        return int(self.projection.shape[0])


def face_from_projection(p) -> FaceHandle:
    """Wrap a Hermitian idempotent as a face; rank is its (integer) trace."""
    sym = linalg.require_hermitian(p)
    idem_defect = linalg.max_entry_distance(sym @ sym, sym)
    if idem_defect > 1e-9:
        raise ValidationError(
            CODE_NOT_PROJECTION,
            f"not idempotent: max |P^2 - P| = {idem_defect:.3e}",
            amount=idem_defect,
        )
    tr = float(np.trace(sym).real)
    rank = round(tr)
    if abs(tr - rank) > 1e-9:
        raise ValidationError(
            CODE_NOT_PROJECTION,
            f"trace {tr} is not within 1e-9 of an integer rank",
            amount=abs(tr - rank),
        )
    return FaceHandle(sym, int(rank))


def support_projection(t: StateOperator, rank_tol: float = RANK_TOL) -> FaceHandle:
    """Projection onto the range of t, i.e. the smallest face containing t."""
    vals, vecs = np.linalg.eigh(t.matrix)
    cols = vecs[:, vals > rank_tol]
    if cols.size == 0:
        proj = np.zeros((t.dim, t.dim), dtype=np.complex128)
    else:
        proj = cols @ cols.conj().T
    return face_from_projection(proj)


def face_contains(f: FaceHandle, t: StateOperator, tol: float = 1e-9) -> bool:
    """Membership test: T lies in the face of P exactly when T = P T P."""
    if f.dim != t.dim:
        raise DimensionMismatchError(f"face dim {f.dim} vs state dim {t.dim}")
    p = f.projection
    return linalg.max_entry_distance(t.matrix, p @ t.matrix @ p) <= tol


def face_leq(f1: FaceHandle, f2: FaceHandle, tol: float = 1e-9) -> bool:
    """Face order: range(P1) inside range(P2), tested as P2 P1 P2 = P1."""
    if f1.dim != f2.dim:
        raise DimensionMismatchError(f"face dims differ: {f1.dim} vs {f2.dim}")
    p1, p2 = f1.projection, f2.projection
    return linalg.max_entry_distance(p2 @ p1 @ p2, p1) <= tol


def face_meet(f1: FaceHandle, f2: FaceHandle, tol: float = linalg.SUBSPACE_TOL) -> FaceHandle:
    """Largest face below both: projection onto the intersection of ranges.

    The zero projection is allowed and represents the empty face.
    """
    if f1.dim != f2.dim:
        raise DimensionMismatchError(f"face dims differ: {f1.dim} vs {f2.dim}")
    proj = linalg.range_intersection_projection(f1.projection, f2.projection, tol)
    return face_from_projection(proj)


def is_extremal(t: StateOperator, rank_tol: float = RANK_TOL) -> bool:
    """True exactly for rank-one states (second-largest eigenvalue below threshold)."""
    vals = np.linalg.eigvalsh(t.matrix)
    if vals.shape[0] < 2:
        return True
    return float(vals[-2]) <= rank_tol


def convex_combine(parts: Sequence[tuple[float, StateOperator]]) -> StateOperator:
    """Weighted sum of states, revalidated as a state operator.

    Weights must be nonnegative and sum to 1 within 1e-12.
    """
    if not parts:
        raise ValidationError(CODE_WEIGHT_SUM, "convex combination needs at least one part")
    weights = [float(w) for w, _ in parts]
    if any(w < 0 for w in weights):
        raise ValidationError(CODE_WEIGHT_SUM, f"negative weight in {weights}")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_ATOL:
        raise ValidationError(
            CODE_WEIGHT_SUM,
            f"weights sum to {total!r}, off by {abs(total - 1.0):.3e}",
            amount=abs(total - 1.0),
        )
    dim = parts[0][1].dim
    acc = np.zeros((dim, dim), dtype=np.complex128)
    tol = 0.0
    for w, state in parts:
        if state.dim != dim:
            raise DimensionMismatchError("all parts of a convex combination must share a dimension")
        acc = acc + w * state.matrix
        tol = max(tol, state.tol)
    return new_state(acc, tol or DEFAULT_STATE_TOL)


def _support_data(t: StateOperator, rank_tol: float):
    vals, vecs = np.linalg.eigh(t.matrix)
    mask = vals > rank_tol
    return vals, vecs, mask


def max_component_weight(t1: StateOperator, t2: StateOperator, rank_tol: float = RANK_TOL) -> float:
    """Largest w in [0, 1] with t2 - w*t1 positive semidefinite.

    Zero exactly when t1 is not a convex component of t2.  Computed in
    closed form on the support of t2: w = 1 / lambda_max(B t1 B) with B the
    pseudo-inverse square root of t2; when t1 carries weight outside that
    support no positive w works and the answer is 0.
    """
    if t1.dim != t2.dim:
        raise DimensionMismatchError(f"state dims differ: {t1.dim} vs {t2.dim}")
    vals, vecs, mask = _support_data(t2, rank_tol)
    if not mask.all():
        null_cols = vecs[:, ~mask]
        leak = float(np.real(np.trace(null_cols.conj().T @ t1.matrix @ null_cols)))
        if leak > rank_tol:
            return 0.0
    inv_sqrt = np.where(mask, 1.0 / np.sqrt(np.where(mask, vals, 1.0)), 0.0)
    b = (vecs * inv_sqrt) @ vecs.conj().T
    sandwich = b @ t1.matrix @ b
    sandwich = (sandwich + sandwich.conj().T) / 2
    lam_max = float(np.linalg.eigvalsh(sandwich)[-1])
    if lam_max <= 0.0:
        return 0.0
    return float(min(1.0, 1.0 / lam_max))


def _validate_basis(basis, dim: int) -> np.ndarray:
    rows = np.asarray([np.asarray(v, dtype=np.complex128).reshape(-1) for v in basis])
    if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] != dim:
        raise ValidationError(CODE_BAD_BASIS, f"basis must be non-empty vectors of length {dim}")
    if not np.isfinite(rows).all():
        raise ValidationError(CODE_BAD_BASIS, "basis vectors must be finite")
    gram = rows.conj() @ rows.T
    defect = linalg.max_entry_distance(gram, np.eye(rows.shape[0]))
    if defect > 1e-9:
        raise ValidationError(
            CODE_BAD_BASIS,
            f"basis is not orthonormal: max |<i|j> - delta| = {defect:.3e}",
            amount=defect,
        )
    return rows


def sup_ratio(t1: StateOperator, t2: StateOperator, basis: Sequence | None = None) -> float:
    """Largest diagonal ratio <k|t1|k> / <k|t2|k> over a basis, extended-real.

    The default basis is the eigenbasis of t2.  Terms where both diagonal
    entries are numerically zero (<= 1e-12) are skipped; a term with zero
    denominator but positive numerator makes the supremum +infinity, which
    certifies that t1 is not a convex component of t2 (its support sticks
    out of the support of t2).  Custom bases must be orthonormal within
    1e-9; vectors outside the support of t2 are allowed, the skip rules
    above handle them.
    """
    if t1.dim != t2.dim:
        raise DimensionMismatchError(f"state dims differ: {t1.dim} vs {t2.dim}")
    if basis is None:
        _, eigvecs = np.linalg.eigh(t2.matrix)
        rows = eigvecs.T
    else:
        rows = _validate_basis(basis, t1.dim)
    best = 0.0
    for k in rows:
        num = float(np.real(k.conj() @ t1.matrix @ k))
        den = float(np.real(k.conj() @ t2.matrix @ k))
        if num <= RATIO_ZERO and den <= RATIO_ZERO:
            continue
        if den <= RATIO_ZERO:
            return math.inf
        best = max(best, num / den)
    return best


@dataclass(frozen=True)
class ComponentReport:
    """Joint convex-component diagnostics for a state pair."""

    max_weight: float
    sup_ratio: float
    basis_used: str

    def is_component(self) -> bool:
        return self.max_weight > 0.0


def component_report(t1: StateOperator, t2: StateOperator, basis: Sequence | None = None) -> ComponentReport:
    """Bundle :func:`max_component_weight` and :func:`sup_ratio` for reporting."""
    return ComponentReport(
        max_weight=max_component_weight(t1, t2),
        sup_ratio=sup_ratio(t1, t2, basis),
        basis_used="eigen" if basis is None else "custom",
    )


def state_to_json(t: StateOperator) -> dict:
    obj = linalg.matrix_to_json(t.matrix)
    obj["tol"] = float(t.tol)
    return obj


def state_from_json(obj, *, max_dim: int | None = None) -> StateOperator:
    if not isinstance(obj, dict):
        raise MatrixFormatError("state JSON must be an object")
    tol = obj.get("tol", DEFAULT_STATE_TOL)
    try:
        tol = float(tol)
    except (TypeError, ValueError):
        raise MatrixFormatError(f"state 'tol' must be a number, got {tol!r}") from None
    matrix = linalg.matrix_from_json(obj, max_dim=max_dim)
    return new_state(matrix, tol, max_dim=max_dim)


def face_to_json(f: FaceHandle) -> dict:
    return linalg.matrix_to_json(f.projection)


def face_from_json(obj, *, max_dim: int | None = None) -> FaceHandle:
    return face_from_projection(linalg.matrix_from_json(obj, max_dim=max_dim))
