"""Small dense linear-algebra helpers shared by the Gaussian toolkit.

Quadratures are ordered ``(x1, p1, x2, p2, ...)`` throughout.
"""

import math

import numpy as np

from .errors import InvalidInputError, NumericalDomainError

SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10
PINV_CUTOFF = 1e-12

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
R2 = np.diag([1.0, -1.0])
I2 = np.eye(2)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the ``2n x 2n`` block-diagonal symplectic form ``J + J + ...``."""
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidInputError(f"n_modes must be a positive integer, got {n_modes!r}")
    return np.kron(np.eye(int(n_modes)), J2)


def as_square(M, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def n_modes_of(V: np.ndarray) -> int:
    dim = V.shape[0]
    if dim == 0 or dim % 2:
        raise InvalidInputError(f"quadrature dimension must be even and nonzero, got {dim}")
    return dim // 2


def is_symmetric(M: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    return bool(np.max(np.abs(M - M.T), initial=0.0) <= tol)


def symplectic_defect(S: np.ndarray) -> float:
    """Max-norm of ``S J S^T - J``."""
    J = symplectic_form(n_modes_of(S))
    return float(np.max(np.abs(S @ J @ S.T - J)))


def is_symplectic(S: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    return symplectic_defect(S) <= tol


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    dims = [b.shape[0] for b in blocks]
    out = np.zeros((sum(dims), sum(dims)))
    k = 0
    for b, d in zip(blocks, dims):
        out[k:k + d, k:k + d] = b
        k += d
    return out


def pinv_symmetric(M: np.ndarray, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a real symmetric matrix.

    Eigenvalues below ``cutoff`` times the largest modulus are treated as zero.
    """
    w, U = np.linalg.eigh(M)
    scale = np.max(np.abs(w), initial=0.0)
    if scale == 0.0:
        return np.zeros_like(M)
    keep = np.abs(w) > cutoff * scale
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return (U * inv) @ U.T


def expm(A, order: int = 18, theta: float = 0.5) -> np.ndarray:
    r"""Matrix exponential by scaling and squaring of a truncated Taylor series.

    The argument is scaled by :math:`2^{-s}` so that its 1-norm is at most
    ``theta``; a degree-``order`` Taylor polynomial of the scaled matrix is then
    squared ``s`` times. With the defaults the truncation error of the scaled
    series is below :math:`0.5^{19}/19! \approx 10^{-23}`, far under double
    precision, so accuracy is limited by the squaring phase.

    Args:
        A: square real or complex matrix.
        order: Taylor degree.
        theta: target 1-norm of the scaled matrix.

    Returns:
        ``exp(A)`` as a dense array.

    Raises:
        NumericalDomainError: the result is not finite.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"expm needs a square matrix, got shape {A.shape}")
    norm = float(np.linalg.norm(A, 1))
    if not math.isfinite(norm):
        raise NumericalDomainError(f"expm argument is not finite (1-norm {norm})")
    s = 0 if norm <= theta else int(math.ceil(math.log2(norm / theta)))
    X = A / (2.0 ** s)

    n = A.shape[0]
    result = np.eye(n, dtype=np.result_type(A, float))
    term = np.eye(n, dtype=result.dtype)
    for k in range(1, order + 1):
        term = term @ X / k
        result = result + term
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            result = result @ result

    if not np.all(np.isfinite(result)):
        raise NumericalDomainError(
            f"expm overflowed: 1-norm of argument {norm:.3e}, {s} squarings"
        )
    return result
