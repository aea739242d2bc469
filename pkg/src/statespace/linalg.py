"""Dense complex linear algebra kernel.

Hermitian eigendecomposition, tensor products, partial traces and positivity
checks on square complex matrices, the numerical substrate for the rest of
the package.  Matrices are numpy ``complex128`` arrays; every public function
validates its inputs and returns fresh read-only arrays, so values are safe
to share between threads.

The ambient dimension is capped (default 4096, override with the
``STATESPACE_MAX_DIM`` environment variable or a ``max_dim`` argument).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    CODE_NON_HERMITIAN,
    DimensionMismatchError,
    MatrixFormatError,
    ValidationError,
)

DEFAULT_MAX_DIM = 4096
MAX_DIM_ENV_VAR = "STATESPACE_MAX_DIM"

#: absolute entrywise tolerance under which a matrix counts as Hermitian
HERMITIAN_ATOL = 1e-10
#: default absolute tolerance for positive semidefiniteness
DEFAULT_PSD_TOL = 1e-9
#: eigenvalue threshold separating a range from a numerical null space
SUBSPACE_TOL = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def effective_max_dim(max_dim: int | None = None) -> int:
    """Resolve the dimension cap: explicit argument, else env var, else default."""
    if max_dim is not None:
        return int(max_dim)
    raw = os.environ.get(MAX_DIM_ENV_VAR)
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise MatrixFormatError(
            f"{MAX_DIM_ENV_VAR} must be an integer, got {raw!r}"
        ) from None
    if value < 1:
        raise MatrixFormatError(f"{MAX_DIM_ENV_VAR} must be positive, got {value}")
    return value


def as_matrix(m, *, max_dim: int | None = None) -> np.ndarray:
    """Coerce to a validated square complex128 matrix (read-only copy).

    Rejects non-square shapes, dimension 0, dimensions above the cap and
    non-finite entries.
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise MatrixFormatError(f"expected a square matrix, got shape {arr.shape}")
    d = arr.shape[0]
    if d < 1:
        raise MatrixFormatError("matrix dimension must be at least 1")
    cap = effective_max_dim(max_dim)
    if d > cap:
        raise MatrixFormatError(f"dimension {d} exceeds the configured cap {cap}")
    if not np.isfinite(arr).all():
        raise MatrixFormatError("matrix entries must be finite (no NaN/Inf)")
    return _readonly(arr.copy())


def matrix_to_json(m) -> dict:
    """Encode as the repo-wide JSON form {"dim": d, "entries": [[[re, im], ...], ...]}."""
    arr = as_matrix(m)
    d = arr.shape[0]
    entries = [
        [[float(arr[i, j].real), float(arr[i, j].imag)] for j in range(d)]
        for i in range(d)
    ]
    return {"dim": d, "entries": entries}


def matrix_from_json(obj, *, max_dim: int | None = None) -> np.ndarray:
    """Decode the repo-wide matrix JSON encoding, validating shape and finiteness."""
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix JSON must be an object")
    try:
        d = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"matrix JSON needs integer 'dim' and 'entries': {exc}")
    if not isinstance(entries, list) or len(entries) != d:
        raise MatrixFormatError(f"'entries' must be a list of {d} rows")
    out = np.zeros((d, d), dtype=np.complex128) if d >= 1 else None
    if out is None:
        raise MatrixFormatError("matrix dimension must be at least 1")
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != d:
            raise MatrixFormatError(f"row {i} must be a list of {d} [re, im] pairs")
        for j, pair in enumerate(row):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise MatrixFormatError(f"entry ({i},{j}) must be an [re, im] pair")
            try:
                out[i, j] = complex(float(pair[0]), float(pair[1]))
            except (TypeError, ValueError):
                raise MatrixFormatError(f"entry ({i},{j}) is not numeric") from None
    return as_matrix(out, max_dim=max_dim)


def trace(m) -> complex:
    arr = as_matrix(m)
    return complex(np.trace(arr))


def adjoint(m) -> np.ndarray:
    arr = as_matrix(m)
    return _readonly(arr.conj().T.copy())


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot multiply {a.shape[0]}x{a.shape[0]} by {b.shape[0]}x{b.shape[0]}")
    return _readonly(a @ b)


def add(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot add {a.shape[0]}x{a.shape[0]} and {b.shape[0]}x{b.shape[0]}")
    return _readonly(a + b)


def scale(c, m) -> np.ndarray:
    arr = as_matrix(m)
    return _readonly(complex(c) * arr)


def hermitian_defect(m) -> float:
    """Max-entry asymmetry |m - m†|."""
    arr = np.asarray(m, dtype=np.complex128)
    return float(np.max(np.abs(arr - arr.conj().T)))


def require_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return the symmetrized matrix (m + m†)/2, or raise if the asymmetry exceeds ``atol``."""
    arr = as_matrix(m)
    defect = hermitian_defect(arr)
    if defect > atol:
        raise ValidationError(
            CODE_NON_HERMITIAN,
            f"matrix is not Hermitian: max asymmetry {defect:.3e} exceeds {atol:.1e}",
            amount=defect,
        )
    return _readonly((arr + arr.conj().T) / 2)


def tensor_product(a, b, *, max_dim: int | None = None) -> np.ndarray:
    """Kronecker product a ⊗ b; rejects results above the dimension cap."""
    a = as_matrix(a)
    b = as_matrix(b)
    da, db = a.shape[0], b.shape[0]
    cap = effective_max_dim(max_dim)
    if da * db > cap:
        raise MatrixFormatError(
            f"tensor product dimension {da}*{db}={da * db} exceeds the configured cap {cap}"
        )
    return _readonly(np.kron(a, b))


def partial_trace(m, dims: tuple[int, int], over: str) -> np.ndarray:
    """Trace out one tensor factor of a matrix on a dA*dB dimensional space.

    ``dims`` gives (dA, dB); ``over`` names the subsystem to trace out,
    "A" or "B".  The retained factor's matrix is returned.
    """
    arr = as_matrix(m)
    try:
        da, db = (int(dims[0]), int(dims[1]))
    except (TypeError, ValueError, IndexError):
        raise DimensionMismatchError(f"dims must be a pair of integers, got {dims!r}") from None
    if da < 1 or db < 1:
        raise DimensionMismatchError(f"factor dimensions must be positive, got {(da, db)}")
    if da * db != arr.shape[0]:
        raise DimensionMismatchError(
            f"dims {da}x{db}={da * db} do not factor the matrix dimension {arr.shape[0]}"
        )
    tag = str(over).upper()
    if tag not in ("A", "B"):
        raise DimensionMismatchError(f"over must be 'A' or 'B', got {over!r}")
    four = arr.reshape(da, db, da, db)
    if tag == "B":
        out = np.trace(four, axis1=1, axis2=3)
    else:
        out = np.trace(four, axis1=0, axis2=2)
    return _readonly(np.ascontiguousarray(out))


@dataclass(frozen=True)
class HermitianEigensystem:
    """Eigenvalues ascending, eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return _readonly((v * self.eigenvalues) @ v.conj().T)


def hermitian_eig(m, atol: float = HERMITIAN_ATOL) -> HermitianEigensystem:
    """Eigendecomposition of a Hermitian matrix.

    Inputs with asymmetry below ``atol`` are symmetrized first; anything
    worse is rejected with the max asymmetry reported.
    """
    sym = require_hermitian(m, atol)
    vals, vecs = np.linalg.eigh(sym)
    return HermitianEigensystem(_readonly(vals.copy()), _readonly(vecs.copy()))


@dataclass(frozen=True)
class PsdResult:
    is_psd: bool
    min_eigenvalue: float

    def __bool__(self) -> bool:
        return self.is_psd


def psd_check(m, tol: float = DEFAULT_PSD_TOL) -> PsdResult:
    """Positivity test: true iff the smallest eigenvalue is at least -tol."""
    sym = require_hermitian(m)
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    return PsdResult(min_eig >= -tol, min_eig)


def _projection_from_columns(cols: np.ndarray, dim: int) -> np.ndarray:
    if cols.size == 0:
        return _readonly(np.zeros((dim, dim), dtype=np.complex128))
    return _readonly(cols @ cols.conj().T)


def range_intersection_projection(p, q, tol: float = SUBSPACE_TOL) -> np.ndarray:
    """Projection onto range(p) ∩ range(q).

    Computed as the null space of (I - p) + (I - q), whose kernel is exactly
    the common range; eigenvalues at or below ``tol`` count as null.
    """
    p = require_hermitian(p)
    q = require_hermitian(q)
    if p.shape != q.shape:
        raise DimensionMismatchError("projections must share a dimension")
    d = p.shape[0]
    eye = np.eye(d)
    vals, vecs = np.linalg.eigh((eye - p) + (eye - q))
    keep = vecs[:, vals <= tol]
    return _projection_from_columns(keep, d)


def range_span_projection(p, q, tol: float = SUBSPACE_TOL) -> np.ndarray:
    """Projection onto range(p) + range(q): eigenvectors of p + q above ``tol``."""
    p = require_hermitian(p)
    q = require_hermitian(q)
    if p.shape != q.shape:
        raise DimensionMismatchError("projections must share a dimension")
    vals, vecs = np.linalg.eigh(p + q)
    keep = vecs[:, vals > tol]
    return _projection_from_columns(keep, p.shape[0])


def identity(dim: int) -> np.ndarray:
    return _readonly(np.eye(int(dim), dtype=np.complex128))


def max_entry_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatchError("matrices must share a shape")
    return float(np.max(np.abs(a - b)))


def vector_from_json(obj) -> np.ndarray:
    """Decode a complex vector given as a list of [re, im] pairs."""
    if not isinstance(obj, list) or not obj:
        raise MatrixFormatError("vector JSON must be a non-empty list of [re, im] pairs")
    out = np.zeros(len(obj), dtype=np.complex128)
    for i, pair in enumerate(obj):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise MatrixFormatError(f"vector entry {i} must be an [re, im] pair")
        try:
            out[i] = complex(float(pair[0]), float(pair[1]))
        except (TypeError, ValueError):
            raise MatrixFormatError(f"vector entry {i} is not numeric") from None
    if not np.isfinite(out).all():
        raise MatrixFormatError("vector entries must be finite")
    return _readonly(out)


def vector_to_json(v: Iterable[complex]) -> list:
    arr = np.asarray(list(v), dtype=np.complex128)
    return [[float(x.real), float(x.imag)] for x in arr]
