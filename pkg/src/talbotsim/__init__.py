"""Phase-noise suppression simulator for Talbot-effect comb upconversion.

Models a dispersive element as per-comb-line integer-sample delays,
superposes delayed copies of a noise-impaired repetition-rate carrier,
and measures the resulting single-sideband phase noise and jitter.
"""

__version__ = "0.1.0"

from .analysis import (
    JitterResult,
    PhaseNoiseSpectrum,
    classical_penalty,
    demod_phase_psd,
    jitter,
    periodogram,
    phase_noise_spectrum,
)
from .dispersion import (
    DelayPlan,
    DispersionSpec,
    delay_plan,
    eval_dispersion,
    group_delay,
    min_effective_dispersion,
    offset_difference,
    one_sample_dispersion,
    read_dispersion_table,
)
from .errors import BudgetError, CarrierNotFoundError, ConfigError
from .experiments import (
    ExperimentConfig,
    SweepRow,
    offsets_experiment,
    run_all,
    sweep_comb_width,
    sweep_oversampling,
)
from .model import (
    SPEED_OF_LIGHT,
    CombSpec,
    NoiseProfile,
    PhysicalConstants,
    SampledSignal,
    SimGrid,
    build_grid,
    comb_lines,
    convert_dispersion,
    estimate_memory,
    estimate_memory_bytes,
)
from .superposition import choose_engine, superpose, superpose_spectral, superpose_time
from .synthesis import SynthesisRequest, default_noise_profile, synth_carrier, synth_phase_track

__all__ = [
    "__version__",
    "SPEED_OF_LIGHT",
    "PhysicalConstants",
    "CombSpec",
    "SimGrid",
    "SampledSignal",
    "NoiseProfile",
    "build_grid",
    "comb_lines",
    "convert_dispersion",
    "estimate_memory",
    "estimate_memory_bytes",
    "DispersionSpec",
    "DelayPlan",
    "eval_dispersion",
    "group_delay",
    "delay_plan",
    "one_sample_dispersion",
    "min_effective_dispersion",
    "offset_difference",
    "read_dispersion_table",
    "SynthesisRequest",
    "synth_phase_track",
    "synth_carrier",
    "default_noise_profile",
    "superpose",
    "superpose_time",
    "superpose_spectral",
    "choose_engine",
    "PhaseNoiseSpectrum",
    "JitterResult",
    "periodogram",
    "phase_noise_spectrum",
    "jitter",
    "classical_penalty",
    "demod_phase_psd",
    "ExperimentConfig",
    "SweepRow",
    "sweep_oversampling",
    "sweep_comb_width",
    "offsets_experiment",
    "run_all",
    "BudgetError",
    "ConfigError",
    "CarrierNotFoundError",
]
