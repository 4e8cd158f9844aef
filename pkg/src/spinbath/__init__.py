"""Spin-bath noise spectroscopy with conventional and asymmetric Hahn-echo sequences.

Simulates the coherence decay of a spin qubit coupled to an
Ornstein-Uhlenbeck (Lorentzian) spin bath under a single refocusing pulse at
fractional time alpha, generates realistic noisy measurements, and extracts
the bath parameters (b, tau_c) by least squares, reduced chi-squared region
scans and multi-alpha region intersection.
"""

from ._quadrature import QuadratureError
from .coherence import (
    SequenceSpec,
    coherence_closed_form,
    coherence_freq_oracle,
    coherence_time_oracle,
    control_function,
    filter_function,
    log_coherence_closed_form,
    slow_noise_echo,
    slow_noise_fid,
    slow_noise_t2,
    slow_noise_t2star,
)
from .config import ConfigError, PipelineConfig
from .estimators import (
    ClosedFormCoherenceFit,
    FitError,
    FitResult,
    SlowNoiseEstimate,
    SlowNoiseFit,
    StretchedExponentialFit,
    chi2_nu,
    fit_closed_form,
    fit_stretched_exponential,
    slow_noise_params,
)
from .noise import (
    CorrelationKind,
    NoiseParams,
    correlation,
    lorentzian_psd,
    psd_from_correlation,
)
from .regions import (
    ChiSquaredRegionScan,
    GridSpec,
    RegionEstimate,
    RegionMap,
    coherence_model_grid,
    intersect_regions,
    scan_region,
)
from .simulate import (
    CoherenceCurve,
    MeasurementModel,
    build_time_grid,
    effective_sigma,
    simulate_curve,
)

__version__ = "0.1.0"

__all__ = [
    "ChiSquaredRegionScan",
    "ClosedFormCoherenceFit",
    "CoherenceCurve",
    "ConfigError",
    "CorrelationKind",
    "FitError",
    "FitResult",
    "GridSpec",
    "MeasurementModel",
    "NoiseParams",
    "PipelineConfig",
    "QuadratureError",
    "RegionEstimate",
    "RegionMap",
    "SequenceSpec",
    "SlowNoiseEstimate",
    "SlowNoiseFit",
    "StretchedExponentialFit",
    "build_time_grid",
    "chi2_nu",
    "coherence_closed_form",
    "coherence_freq_oracle",
    "coherence_model_grid",
    "coherence_time_oracle",
    "control_function",
    "correlation",
    "effective_sigma",
    "filter_function",
    "fit_closed_form",
    "fit_stretched_exponential",
    "intersect_regions",
    "log_coherence_closed_form",
    "lorentzian_psd",
    "psd_from_correlation",
    "scan_region",
    "simulate_curve",
    "slow_noise_echo",
    "slow_noise_fid",
    "slow_noise_params",
    "slow_noise_t2",
    "slow_noise_t2star",
    "__version__",
]
