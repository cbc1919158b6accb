"""Dense complex-matrix algebra shared by every other module.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Nothing here
mutates its arguments; all functions return fresh arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10

# below this exponent repeated multiplication is used, above it squaring
_REPEATED_MULT_LIMIT = 64

KINDS = ("unitary", "projector", "density")


class InvalidOperandError(ValueError):
    """Raised for non-square, non-finite or mismatched operands."""


def as_matrix(A) -> np.ndarray:
    """Coerce ``A`` to a square, finite ``complex128`` array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidOperandError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidOperandError("matrix has non-finite entries")
    return M


def _same_dim(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise InvalidOperandError(f"dimension mismatch: {A.shape} vs {B.shape}")


def dagger(A) -> np.ndarray:
    return np.conj(np.asarray(A)).T


def operator_norm(A) -> float:
    """Largest singular value, i.e. ``sup ||Av||`` over unit vectors ``v``."""
    M = as_matrix(A)
    return float(np.linalg.svd(M, compute_uv=False)[0])


def trace_norm(A) -> float:
    """Sum of singular values, ``Tr sqrt(A^dagger A)``."""
    M = as_matrix(A)
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def commutator(A, B) -> np.ndarray:
    A, B = as_matrix(A), as_matrix(B)
    _same_dim(A, B)
    return A @ B - B @ A


def matrix_power(U, n: int) -> np.ndarray:
    """``U**n`` for ``n >= 0``.

    Small exponents use plain repeated multiplication; larger ones use
    binary exponentiation.
    """
    M = as_matrix(U)
    if n < 0:
        raise InvalidOperandError(f"power must be non-negative, got {n}")
    result = np.eye(M.shape[0], dtype=np.complex128)
    if n < _REPEATED_MULT_LIMIT:
        for _ in range(n):
            result = result @ M
        return result
    base = M
    while n:
        if n & 1:
            result = result @ base
        base = base @ base
        n >>= 1
    return result


def conjugate_by_power(U, A, n: int) -> np.ndarray:
    """Return ``U^n A (U^dagger)^n``."""
    A = as_matrix(A)
    Un = matrix_power(U, n)
    _same_dim(Un, A)
    return Un @ A @ dagger(Un)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`.

    ``defect`` is the worst invariant violation seen; ``failed`` names the
    invariant responsible when ``valid`` is false.
    """

    kind: str
    valid: bool
    defect: float
    failed: str | None = None
    defects: dict[str, float] | None = None


def _defects(M: np.ndarray, kind: str) -> dict[str, float]:
    eye = np.eye(M.shape[0])
    if kind == "unitary":
        return {"unitarity": operator_norm(dagger(M) @ M - eye)}
    herm = operator_norm(M - dagger(M))
    if kind == "projector":
        return {"hermiticity": herm, "idempotence": operator_norm(M @ M - M)}
    if kind == "density":
        H = (M + dagger(M)) / 2
        min_eig = float(np.linalg.eigvalsh(H)[0])
        return {
            "hermiticity": herm,
            "positivity": max(0.0, -min_eig),
            "trace": abs(np.trace(M) - 1.0),
        }
    raise ValueError(f"unknown operator kind {kind!r}; expected one of {KINDS}")


def validate(A, kind: str, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check ``A`` against the invariants of ``kind`` within ``tol``.

    Never raises for bad matrix contents; malformed input is reported as an
    invalid result with infinite defect.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {KINDS}")
    try:
        M = as_matrix(A)
    except InvalidOperandError:
        return ValidationReport(kind, False, float("inf"), "shape/finiteness")
    defects = _defects(M, kind)
    failed = next((name for name, d in defects.items() if d > tol), None)
    worst = max(defects.values())
    return ValidationReport(kind, failed is None, worst, failed, defects)


def is_unitary(U, tol: float = DEFAULT_TOL) -> bool:
    return validate(U, "unitary", tol).valid


def require(A, kind: str, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``A`` as a matrix, raising if it is not a valid ``kind``."""
    M = as_matrix(A)
    report = validate(M, kind, tol)
    if not report.valid:
        raise InvalidOperandError(
            f"not a valid {kind}: {report.failed} defect {report.defect:.3e} > {tol:g}"
        )
    return M
