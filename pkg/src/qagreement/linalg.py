"""Dense complex matrix helpers.

Operators and states are plain ``numpy`` complex128 arrays of shape
``(dim, dim)``.  Every public function validates its inputs with
:func:`as_matrix`, so a malformed array fails at the boundary rather than
deep inside a recursion.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DimensionMismatch, InvalidOperator

#: Default tolerance for equalities that hold exactly in exact arithmetic.
TOL = 1e-9

ComplexMatrix = np.ndarray


def as_matrix(a) -> ComplexMatrix:
    """Return ``a`` as a square, finite complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidOperator(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidOperator("matrix has non-finite entries")
    return m


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=np.complex128)


def zeros(dim: int) -> ComplexMatrix:
    return np.zeros((dim, dim), dtype=np.complex128)


def _same_dim(a: ComplexMatrix, b: ComplexMatrix) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def matmul(a, b) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim(a, b)
    return a @ b


def kron(a, b) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def adjoint(a) -> ComplexMatrix:
    return as_matrix(a).conj().T


def eigvalsh(a) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (only the lower triangle is read)."""
    try:
        return np.linalg.eigvalsh(as_matrix(a))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc


def trace_norm(a) -> float:
    """Sum of singular values, ``Tr sqrt(a^dagger a)``."""
    try:
        s = np.linalg.svd(as_matrix(a), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return float(np.sum(s))


def max_abs(a) -> float:
    """Max-entry magnitude; the entrywise norm used by all structural checks."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a, tol: float = TOL) -> bool:
    a = as_matrix(a)
    return max_abs(a - a.conj().T) <= tol


def is_projector(a, tol: float = TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(a)
    return max_abs(a @ a - a) <= tol and max_abs(a - a.conj().T) <= tol


def is_density(a, tol: float = TOL) -> bool:
    a = as_matrix(a)
    if not is_hermitian(a, tol):
        return False
    if abs(np.trace(a) - 1.0) > tol:
        return False
    return bool(eigvalsh(a)[0] >= -tol)


def commutator(p, q) -> ComplexMatrix:
    p, q = as_matrix(p), as_matrix(q)
    _same_dim(p, q)
    return p @ q - q @ p


def commutator_norm(p, q) -> float:
    return max_abs(commutator(p, q))


def expectation(op, rho) -> float:
    """Real part of ``Tr(op rho)``; exact for Hermitian ``op`` and density ``rho``."""
    # sum(A * B.T) == Tr(AB) without forming the product
    return float(np.real(np.sum(np.asarray(op) * np.asarray(rho).T)))


def outer(vec) -> ComplexMatrix:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def projector_onto(vectors) -> ComplexMatrix:
    """Orthogonal projector onto the span of the given column vectors."""
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[1] == 0:
        return zeros(v.shape[0])
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    u = u[:, :rank]
    return u @ u.conj().T
