"""Continuous-variable entanglement swapping with Gaussian states.

Applied to two radiation-pressure driven micromechanical oscillators whose
optical sidebands are Bell-measured.
"""

__version__ = "0.1.0"

from .core import (
    GaussianState,
    NormalFormBlocks,
    TwoModeBlocks,
    apply_symplectic,
    check_physicality,
    log_negativity,
    normal_form,
    partial_trace,
    pt_symplectic_eigenvalues,
    symplectic_eigenvalues,
    tensor,
)
from .measurements import (
    beam_splitter_symplectic,
    bell_measurement,
    heterodyne_update,
    homodyne_update,
)
from .optomech import OptomechParams, coupling_drift, propagate, thermal_occupancy
from .protocol import Strategy, decoherence_time, run_strategy, sweep, xrel_variance
from .swapping import SwapInputs, eta_io, swap_general, swap_normal_form, swap_symmetric
