r"""Gaussian states in the covariance-matrix picture.

Conventions: quadratures ``(x_1, p_1, x_2, p_2, ...)`` with :math:`[x, p] = i`,
so the vacuum covariance matrix (CM) is :math:`I/2`, and a CM is physical iff
:math:`V + iJ/2 \geq 0`.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from .errors import (
    InvalidInputError,
    NumericalClampWarning,
    NumericalDomainError,
    PureLimitWarning,
    ReductionError,
)
from .linalg import (
    I2,
    R2,
    SYMMETRY_TOL,
    as_square,
    direct_sum,
    is_symmetric,
    n_modes_of,
    symplectic_defect,
    symplectic_form,
)

PHYSICALITY_TOL = 1e-10
RADICAND_TOL = 1e-12
REDUCTION_TOL = 1e-9

# Partial transposition on the second mode of a two-mode system.
PT_SECOND = np.diag([1.0, 1.0, 1.0, -1.0])


def as_covariance(V, name: str = "covariance matrix") -> np.ndarray:
    """Validate ``V`` as a real symmetric ``2n x 2n`` array and return it."""
    V = as_square(V, name)
    n_modes_of(V)
    scale = max(1.0, float(np.max(np.abs(V))))
    if not is_symmetric(V, SYMMETRY_TOL * scale):
        raise InvalidInputError(f"{name} is not symmetric")
    return V


@dataclass(frozen=True)
class GaussianState:
    """A Gaussian state: covariance matrix plus first moments.

    ``labels`` optionally names each mode; it travels through :func:`tensor`
    and :func:`partial_trace`.
    """

    cm: np.ndarray
    displacement: Optional[np.ndarray] = None
    labels: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        cm = as_covariance(self.cm)
        if self.displacement is None:
            d = np.zeros(cm.shape[0])
        else:
            d = np.asarray(self.displacement, dtype=float).reshape(-1)
        if d.shape[0] != cm.shape[0]:
            raise InvalidInputError(
                f"displacement has length {d.shape[0]}, expected {cm.shape[0]}"
            )
        if self.labels is not None and len(self.labels) != cm.shape[0] // 2:
            raise InvalidInputError("one label per mode is required")
        object.__setattr__(self, "cm", cm)
        object.__setattr__(self, "displacement", d)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_modes(self) -> int:
        return self.cm.shape[0] // 2

    def is_physical(self) -> bool:
        return check_physicality(self.cm)


@dataclass(frozen=True)
class TwoModeBlocks:
    """The 2x2 blocks of a two-mode CM ``[[A, D], [D^T, C]]``."""

    A: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @classmethod
    def from_matrix(cls, V) -> "TwoModeBlocks":
        V = as_covariance(V)
        if V.shape != (4, 4):
            raise InvalidInputError(f"expected a 4x4 two-mode CM, got {V.shape}")
        return cls(A=V[:2, :2].copy(), C=V[2:, 2:].copy(), D=V[:2, 2:].copy())

    def matrix(self) -> np.ndarray:
        return np.block([[self.A, self.D], [self.D.T, self.C]])


@dataclass(frozen=True)
class NormalFormBlocks:
    """Two-mode CM in standard form ``[[a I, diag(d, d')], [diag(d, d'), c I]]``.

    :func:`normal_form` always returns ``d >= |d_prime|``.
    """

    a: float
    c: float
    d: float
    d_prime: float

    def matrix(self) -> np.ndarray:
        D = np.diag([self.d, self.d_prime])
        return np.block([[self.a * I2, D], [D, self.c * I2]])

    def det(self) -> float:
        """Determinant of the assembled CM, ``(ac - d^2)(ac - d'^2)``."""
        ac = self.a * self.c
        return (ac - self.d ** 2) * (ac - self.d_prime ** 2)

    def is_physical(self) -> bool:
        return check_physicality(self.matrix())


# ---------------------------------------------------------------------------
# Standard states and symplectics


def vacuum(n_modes: int = 1) -> GaussianState:
    return GaussianState(0.5 * np.eye(2 * n_modes))


def thermal(n_bar: float) -> GaussianState:
    """Single-mode thermal state with mean occupation ``n_bar``."""
    if n_bar < 0:
        raise InvalidInputError(f"n_bar must be nonnegative, got {n_bar}")
    return GaussianState((n_bar + 0.5) * I2)


def two_mode_squeezed_cm(s: float, n_bar: float = 0.0) -> np.ndarray:
    """CM of a two-mode squeezed thermal state (both inputs at ``n_bar``)."""
    nu = n_bar + 0.5
    ch, sh = math.cosh(2 * s), math.sinh(2 * s)
    return nu * np.block([[ch * I2, sh * R2], [sh * R2, ch * I2]])


def rotation(phi: float) -> np.ndarray:
    """Single-mode phase-space rotation ``[[cos, -sin], [sin, cos]]``."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def squeezing(r: float) -> np.ndarray:
    """Single-mode squeezer ``diag(e^-r, e^r)``."""
    return np.diag([math.exp(-r), math.exp(r)])


def two_mode_squeezing(s: float) -> np.ndarray:
    """Two-mode squeezer; maps vacuum to :func:`two_mode_squeezed_cm`."""
    ch, sh = math.cosh(s), math.sinh(s)
    return np.block([[ch * I2, sh * R2], [sh * R2, ch * I2]])


def embed(S_local: np.ndarray, modes: Sequence[int], n_modes: int) -> np.ndarray:
    """Lift a symplectic acting on ``modes`` to the full ``n_modes`` system."""
    S_local = np.asarray(S_local, dtype=float)
    idx = _quadrature_indices(modes, n_modes)
    if S_local.shape != (len(idx), len(idx)):
        raise InvalidInputError(
            f"local symplectic has shape {S_local.shape}, expected {(len(idx),) * 2}"
        )
    S = np.eye(2 * n_modes)
    S[np.ix_(idx, idx)] = S_local
    return S


def _passive_symplectic(rng: np.random.Generator, n_modes: int) -> np.ndarray:
    if n_modes == 1:
        return rotation(rng.uniform(0.0, 2 * np.pi))
    U = unitary_group.rvs(n_modes, random_state=rng)
    X, Y = U.real, U.imag
    O = np.block([[X, -Y], [Y, X]])  # xx..pp ordering
    perm = np.ravel(np.column_stack([np.arange(n_modes), n_modes + np.arange(n_modes)]))
    return O[np.ix_(perm, perm)]


def random_symplectic(
    rng: np.random.Generator, n_modes: int, max_squeezing: float = 1.0
) -> np.ndarray:
    """Random symplectic from the Euler decomposition ``O1 Z O2``."""
    z = rng.uniform(-max_squeezing, max_squeezing, n_modes)
    Z = direct_sum(*(squeezing(zk) for zk in z))
    return _passive_symplectic(rng, n_modes) @ Z @ _passive_symplectic(rng, n_modes)


def random_physical_cm(
    rng: np.random.Generator,
    n_modes: int,
    nu_range: Tuple[float, float] = (0.5, 5.0),
    max_squeezing: float = 1.0,
) -> np.ndarray:
    """Random physical CM ``S diag(nu_1, nu_1, ...) S^T``.

    Symplectic eigenvalues are log-uniform on ``nu_range``, so the result is
    physical by construction.
    """
    lo, hi = nu_range
    nu = np.exp(rng.uniform(math.log(lo), math.log(hi), n_modes))
    S = random_symplectic(rng, n_modes, max_squeezing)
    V = S @ np.diag(np.repeat(nu, 2)) @ S.T
    return 0.5 * (V + V.T)


# ---------------------------------------------------------------------------
# Physicality and entanglement


def check_physicality(V, tol: float = PHYSICALITY_TOL) -> bool:
    """Return True iff ``V + iJ/2`` is positive semidefinite (to ``-tol``)."""
    V = as_covariance(V)
    J = symplectic_form(n_modes_of(V))
    w = np.linalg.eigvalsh(V + 0.5j * J)
    return bool(w.min() >= -tol)


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic eigenvalues of ``V`` in ascending order, one per mode."""
    V = as_covariance(V)
    n = n_modes_of(V)
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ V)))
    # moduli come in equal pairs
    return 0.5 * (moduli[0::2] + moduli[1::2])


def pt_symplectic_eigenvalues(V) -> Tuple[float, float]:
    r"""Symplectic eigenvalues of the partially transposed two-mode CM.

    Uses :math:`\Sigma = \det A + \det C - 2 \det D` and
    :math:`\eta^{\pm} = 2^{-1/2}[\Sigma \pm (\Sigma^2 - 4 \det V)^{1/2}]^{1/2}`.

    Returns:
        ``(eta_plus, eta_minus)`` with ``eta_plus >= eta_minus >= 0``.

    Raises:
        NumericalDomainError: a radicand is negative beyond roundoff.
    """
    V = as_covariance(V)
    if V.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 two-mode CM, got {V.shape}")
    A, C, D = V[:2, :2], V[2:, 2:], V[:2, 2:]
    sigma = np.linalg.det(A) + np.linalg.det(C) - 2.0 * np.linalg.det(D)
    det_v = np.linalg.det(V)

    disc = sigma * sigma - 4.0 * det_v
    if disc < 0.0:
        if disc < -RADICAND_TOL * max(1.0, sigma * sigma):
            raise NumericalDomainError(f"negative discriminant {disc:.3e}; CM unphysical")
        disc = 0.0
    eta_plus_sq = 0.5 * (sigma + math.sqrt(disc))
    if eta_plus_sq <= 0.0:
        raise NumericalDomainError(f"nonpositive Sigma(V) = {sigma:.3e}; CM unphysical")

    # eta_minus^2 = det V / eta_plus^2, free of the cancellation in Sigma - sqrt(disc)
    eta_minus_sq = det_v / eta_plus_sq
    if eta_minus_sq < 0.0:
        if eta_minus_sq < -RADICAND_TOL * max(1.0, eta_plus_sq):
            raise NumericalDomainError(
                f"negative eta_minus^2 = {eta_minus_sq:.3e}; CM unphysical"
            )
        warnings.warn(
            f"eta_minus^2 = {eta_minus_sq:.3e} clamped to 0", NumericalClampWarning,
            stacklevel=2,
        )
        eta_minus_sq = 0.0
    return math.sqrt(eta_plus_sq), math.sqrt(eta_minus_sq)


def log_negativity(eta_minus: float) -> float:
    """Logarithmic negativity ``max(0, -ln(2 eta_minus))``.

    ``eta_minus == 0`` is the unphysical infinitely-squeezed limit: it returns
    ``inf`` and emits :class:`PureLimitWarning`.
    """
    if not eta_minus >= 0.0:
        raise InvalidInputError(f"eta_minus must be nonnegative, got {eta_minus}")
    if eta_minus == 0.0:
        warnings.warn("eta_minus = 0: infinite log-negativity", PureLimitWarning, stacklevel=2)
        return math.inf
    return max(0.0, -math.log(2.0 * eta_minus))


def entanglement(V) -> float:
    """Log-negativity of a two-mode CM."""
    return log_negativity(pt_symplectic_eigenvalues(V)[1])


# ---------------------------------------------------------------------------
# Normal form


def _local_williamson(A: np.ndarray) -> np.ndarray:
    """Symplectic ``S`` with ``S A S^T = sqrt(det A) I`` for a 2x2 block ``A > 0``."""
    p, q, s = A[0, 0], 0.5 * (A[0, 1] + A[1, 0]), A[1, 1]
    Rphi = rotation(0.5 * math.atan2(2.0 * q, p - s))
    diag = Rphi.T @ A @ Rphi
    l1, l2 = diag[0, 0], diag[1, 1]
    if l1 <= 0.0 or l2 <= 0.0:
        raise ReductionError(f"local block is not positive definite: eigenvalues {l1}, {l2}")
    Z = np.diag([(l2 / l1) ** 0.25, (l1 / l2) ** 0.25])
    return Z @ Rphi.T


def _rotation_svd(M: np.ndarray) -> Tuple[float, float, float, float]:
    """Write ``M = rotation(phi) diag(s1, s2) rotation(theta)`` with ``s1 >= |s2|``.

    ``s2`` carries the sign of ``det M``; zero angles are chosen whenever the
    decomposition is degenerate.
    """
    E = 0.5 * (M[0, 0] + M[1, 1])
    F = 0.5 * (M[0, 0] - M[1, 1])
    G = 0.5 * (M[1, 0] + M[0, 1])
    H = 0.5 * (M[1, 0] - M[0, 1])
    Q, Rr = math.hypot(E, H), math.hypot(F, G)
    a1, a2 = math.atan2(G, F), math.atan2(H, E)
    return 0.5 * (a2 + a1), 0.5 * (a2 - a1), Q + Rr, Q - Rr


def normal_form(V) -> Tuple[NormalFormBlocks, Tuple[np.ndarray, np.ndarray]]:
    """Reduce a two-mode CM to standard form by local symplectics.

    Each local block is first brought to a multiple of the identity (rotation
    then squeeze), after which local rotations diagonalize the cross block.

    Returns:
        ``(blocks, (S_a, S_c))`` such that
        ``(S_a + S_c) V (S_a + S_c)^T == blocks.matrix()``.

    Raises:
        ReductionError: the reduced matrix does not reproduce the standard
            form to 1e-9 of the CM scale.
    """
    V = as_covariance(V)
    if V.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 two-mode CM, got {V.shape}")
    blocks = TwoModeBlocks.from_matrix(V)
    S_a = _local_williamson(blocks.A)
    S_c = _local_williamson(blocks.C)
    phi, theta, d, d_prime = _rotation_svd(S_a @ blocks.D @ S_c.T)
    # d >= |d'| already holds, so no extra pi-rotation is required
    S_a = rotation(phi).T @ S_a
    S_c = rotation(theta) @ S_c

    S = direct_sum(S_a, S_c)
    reduced = S @ V @ S.T
    nf = NormalFormBlocks(
        a=0.5 * (reduced[0, 0] + reduced[1, 1]),
        c=0.5 * (reduced[2, 2] + reduced[3, 3]),
        d=d,
        d_prime=d_prime,
    )
    residual = float(np.max(np.abs(reduced - nf.matrix())))
    if residual > REDUCTION_TOL * max(1.0, float(np.max(np.abs(V)))):
        raise ReductionError(f"normal form residual {residual:.3e}", residual)
    return nf, (S_a, S_c)


# ---------------------------------------------------------------------------
# State manipulation


def apply_symplectic(state: GaussianState, S) -> GaussianState:
    """Evolve ``state`` by ``S``: ``V -> S V S^T``, ``d -> S d``.

    ``S`` must satisfy ``S J S^T = J`` to 1e-10 times ``max(1, max|S|^2)``.
    """
    S = as_square(S, "symplectic")
    if S.shape != state.cm.shape:
        raise InvalidInputError(f"symplectic shape {S.shape} does not match {state.cm.shape}")
    defect = symplectic_defect(S)
    if defect > 1e-10 * max(1.0, float(np.max(np.abs(S))) ** 2):
        raise InvalidInputError(f"matrix is not symplectic (defect {defect:.3e})")
    V = S @ state.cm @ S.T
    return GaussianState(0.5 * (V + V.T), S @ state.displacement, state.labels)


def tensor(*states: GaussianState) -> GaussianState:
    """Product state; modes are concatenated in argument order."""
    if not states:
        raise InvalidInputError("tensor needs at least one state")
    labels = None
    if all(s.labels is not None for s in states):
        labels = sum((s.labels for s in states), ())
    return GaussianState(
        direct_sum(*(s.cm for s in states)),
        np.concatenate([s.displacement for s in states]),
        labels,
    )


def _quadrature_indices(modes: Iterable[int], n_modes: int) -> np.ndarray:
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise InvalidInputError(f"duplicate mode indices in {modes}")
    for m in modes:
        if not 0 <= m < n_modes:
            raise InvalidInputError(f"mode index {m} out of range for {n_modes} modes")
    return np.ravel([[2 * m, 2 * m + 1] for m in modes]).astype(int)


def partial_trace(state: GaussianState, keep: Iterable[int]) -> GaussianState:
    """Reduced state on the modes in ``keep``, which also fixes their order."""
    keep = list(keep)
    if not keep:
        raise InvalidInputError("keep must name at least one mode")
    idx = _quadrature_indices(keep, state.n_modes)
    labels = None if state.labels is None else tuple(state.labels[m] for m in keep)
    return GaussianState(state.cm[np.ix_(idx, idx)], state.displacement[idx], labels)
