"""Phase-space simulation and optimization of a stochastic noiseless amplifier for weak coherent light."""

__version__ = "0.1.0"

from .amplifier import (
    AmplifierConfig,
    AmplifierReport,
    BranchOutcome,
    enumerate_single_photon_branches,
    f_eff_closed_form,
    g_eff_closed_form,
    g_limit_low_reflectivity,
    p_succ_closed_form,
    run_success_branch,
)
from .gausspoly import GaussPolyState, integrate_all, integrate_modes, moment, multiply, substitute_linear
from .optics import (
    BeamSplitter,
    amplitude_expectation,
    beam_split,
    coherent_state,
    collapse_on_detection,
    detection_probability,
    fidelity,
    fock_state,
    mean_photon_number,
    purity,
)
from .optimizer import OptimizationProblem, OptimizationResult, maximize_success, sweep
