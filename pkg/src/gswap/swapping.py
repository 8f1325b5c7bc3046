"""Closed-form entanglement swapping between two bipartite Gaussian states.

Alice holds mode ``a`` correlated with Charlie's ``c1``; Bob holds ``b``
correlated with Charlie's ``c2``. Charlie's Bell measurement on ``(c1, c2)``
leaves Alice and Bob in the state computed here.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import NormalFormBlocks, TwoModeBlocks, as_covariance, check_physicality
from .errors import DegenerateMeasurementError, InvalidInputError
from .linalg import I2, J2, R2, direct_sum, symplectic_form

DEGENERACY_TOL = 1e-12

_Z2 = np.zeros((2, 2))
# Partial transpositions on Alice (first) and Bob (second)
LAMBDA_A = direct_sum(R2, I2)
LAMBDA_B = direct_sum(I2, R2)


@dataclass(frozen=True)
class SwapInputs:
    """Blocks of the Alice-Charlie and Bob-Charlie CMs."""

    v_ac: TwoModeBlocks
    v_bc: TwoModeBlocks

    @classmethod
    def from_matrices(cls, V_ac, V_bc) -> "SwapInputs":
        return cls(TwoModeBlocks.from_matrix(V_ac), TwoModeBlocks.from_matrix(V_bc))

    def check(self) -> None:
        for name, blocks in (("v_ac", self.v_ac), ("v_bc", self.v_bc)):
            if not check_physicality(blocks.matrix()):
                raise InvalidInputError(f"{name} violates the uncertainty principle")


def g_factor(C1: np.ndarray, C2: np.ndarray) -> float:
    """Normalization ``g = 1 / (det C1 + det C2 + Tr(R C2 R J C1 J^T))``."""
    g_inv = np.linalg.det(C1) + np.linalg.det(C2) + np.trace(R2 @ C2 @ R2 @ J2 @ C1 @ J2.T)
    if g_inv <= DEGENERACY_TOL:
        raise DegenerateMeasurementError(f"1/g = {g_inv:.3e}: Charlie's modes carry no noise")
    return 1.0 / g_inv


def swap_general(inputs: SwapInputs) -> np.ndarray:
    """Alice-Bob CM after swapping arbitrary Gaussian inputs.

    Evaluated term by term without simplification::

        V_ab = A + B - g diag(D1, D2) J [L_b K1 L_b + L_a K2 L_a] J^T diag(D1^T, D2^T)

    with ``K_k = [[C_k, C_k], [C_k, C_k]]``.
    """
    A, C1, D1 = inputs.v_ac.A, inputs.v_ac.C, inputs.v_ac.D
    B, C2, D2 = inputs.v_bc.A, inputs.v_bc.C, inputs.v_bc.D
    g = g_factor(C1, C2)

    J4 = symplectic_form(2)
    K1 = np.block([[C1, C1], [C1, C1]])
    K2 = np.block([[C2, C2], [C2, C2]])
    inner = LAMBDA_B @ K1 @ LAMBDA_B + LAMBDA_A @ K2 @ LAMBDA_A
    DD = direct_sum(D1, D2)
    V = direct_sum(A, B) - g * DD @ J4 @ inner @ J4.T @ DD.T
    return 0.5 * (V + V.T)


def swap_normal_form(nf_ac: NormalFormBlocks, nf_bc: NormalFormBlocks) -> np.ndarray:
    """Swapped CM for inputs already in standard form."""
    total = nf_ac.c + nf_bc.c
    if total <= DEGENERACY_TOL:
        raise DegenerateMeasurementError(f"c1 + c2 = {total:.3e}")
    d1, d1p, d2, d2p = nf_ac.d, nf_ac.d_prime, nf_bc.d, nf_bc.d_prime
    correction = np.block([
        [np.diag([d1 ** 2, d1p ** 2]), np.diag([-d1 * d2, d1p * d2p])],
        [np.diag([-d1 * d2, d1p * d2p]), np.diag([d2 ** 2, d2p ** 2])],
    ])
    return direct_sum(nf_ac.a * I2, nf_bc.a * I2) - correction / total


def swap_symmetric(nf_in: NormalFormBlocks) -> np.ndarray:
    """Swapped CM when both pairs share the same standard-form resource."""
    a, c, d, dp = nf_in.a, nf_in.c, nf_in.d, nf_in.d_prime
    if c <= DEGENERACY_TOL:
        raise DegenerateMeasurementError(f"c = {c:.3e}")
    local = np.diag([2 * a * c - d ** 2, 2 * a * c - dp ** 2])
    cross = np.diag([d ** 2, -dp ** 2])
    return np.block([[local, cross], [cross, local]]) / (2.0 * c)


def eta_io(nf_in: NormalFormBlocks) -> Tuple[float, float]:
    """PT symplectic eigenvalues of the symmetric swap output from the input.

    Returns:
        ``(eta_out_minus, eta_out_plus)`` = ``(sqrt(det V_in) / c, a)``.
    """
    if nf_in.c <= DEGENERACY_TOL:
        raise DegenerateMeasurementError(f"c = {nf_in.c:.3e}")
    det_in = nf_in.det()
    if det_in < 0.0:
        if det_in < -1e-12 * max(1.0, (nf_in.a * nf_in.c) ** 2):
            raise InvalidInputError(f"det V_in = {det_in:.3e} < 0; input unphysical")
        det_in = 0.0
    return math.sqrt(det_in) / nf_in.c, nf_in.a


def swap_matrices(V_ac, V_bc) -> np.ndarray:
    """:func:`swap_general` on two 4x4 CMs, checking physicality first."""
    inputs = SwapInputs.from_matrices(as_covariance(V_ac), as_covariance(V_bc))
    inputs.check()
    return swap_general(inputs)
