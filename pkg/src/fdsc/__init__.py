"""Finite-frequency disturbance-attenuation analysis and switching control.

Modules:
    model_core  - plants, bands, closed loops, frequency sweeps
    sdp         - LMI problems, solves, certification, Hermitian embedding
    sdpa_io     - SDPA sparse format writer/reader
    gkyp        - gain LMIs, switching-design LMIs, Q synthesis, gap function
    runtime     - switching law, disturbances, switched simulation
    metrics     - energies, gain ratios, dominance degree, switching stats
    benchmark   - bundled aircraft benchmark and scenario orchestration
    config      - JSON configuration layer
    cli         - command-line entry point
"""

from .model_core import (FrequencyBand, LtiSystem, StateSpacePlant, band_peak_gain,
                         close_loop, make_band, psi_matrix, sigma_max_sweep,
                         transfer_eval)
from .gkyp import finite_frequency_gain, gap_function, synthesize_Q
from .runtime import (BankEntry, ControllerBank, SignalSpec, Trajectory, fd_eef,
                      fd_epf, make_disturbance, select_controller, simulate_switched)
from .metrics import dominance_degree, l2_gain_ratio, output_energy, switching_stats
from .benchmark import builtin_benchmark, run_scenario

__version__ = "0.1.0"
