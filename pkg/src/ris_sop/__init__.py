"""Secrecy outage analysis and design for RIS-assisted MIMO wiretap links."""
from .analytics import (
    DegenerateChannelError,
    GammaFit,
    gain_cdf,
    reg_upper_gamma,
    sop_high_snr_bound,
    sop_single_alice,
    sop_single_eve,
    sop_theory,
)
from .harness import ConfigError, Scenario, load_scenario, run_scenario, write_csv
from .model import (
    Beamformer,
    ChannelSet,
    DimensionError,
    NoiseModel,
    PhaseVector,
    SystemConfig,
    main_capacity,
    random_channels,
)
from .montecarlo import McEstimate, empirical_sop
from .optimize import (
    AOReport,
    alternating_optimize,
    closed_form_phase_single_bob,
    manifold_phase_opt,
    mrt_baseline,
    mrt_phase_shift,
    optimal_beamformer,
    sdr_phase_opt,
)

__version__ = "0.1.0"

__all__ = [
    "AOReport", "Beamformer", "ChannelSet", "ConfigError", "DegenerateChannelError",
    "DimensionError", "GammaFit", "McEstimate", "NoiseModel", "PhaseVector", "Scenario",
    "SystemConfig", "alternating_optimize", "closed_form_phase_single_bob", "empirical_sop",
    "gain_cdf", "load_scenario", "main_capacity", "manifold_phase_opt", "mrt_baseline",
    "mrt_phase_shift", "optimal_beamformer", "random_channels", "reg_upper_gamma",
    "run_scenario", "sdr_phase_opt", "sop_high_snr_bound", "sop_single_alice",
    "sop_single_eve", "sop_theory", "write_csv",
]
