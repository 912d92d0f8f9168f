"""Spin-S Landau-Zener transitions in regular plus fast random magnetic fields.

Analytic noise-averaged theory (transition tables, coherence decay,
fluctuations, adiabatic survival) validated against a built-in Monte Carlo
stochastic-Schroedinger simulator over colored Gaussian noise.
"""

__version__ = "0.1.0"

from .adiabatic import AdiabaticConfig, adiabatic_basis, adiabatic_survival, effective_rate
from .averaged import (AveragedProfile, TransitionMatrix, average_bloch_vector_full,
                       coherence_asymptote, coherence_profile, fluctuation_spin_half,
                       fluctuation_tensor, gz_profile, rank_decay, rational_table,
                       transition_probability_matrix)
from .errors import (ConfigError, DomainError, NumericError, SpinLZError,
                     ValidationError)
from .lz_analytic import (LZParams, SU2Amplitudes, compose_amplitudes,
                          jacobi_polynomial, lanczos_gamma, lz_amplitudes,
                          node_count, rotation_matrix, rotation_matrix_element)
from .noise import (FastnessReport, NoisePath, NoiseSpec, TimeGrid, sample_path,
                    spectral_density_F, spectral_density_G, spectral_density_axis,
                    theta, validate_fastness)
from .propagator import (EnsembleResult, EnsembleSummary, ExperimentConfig,
                         Trajectory, ensemble_statistics, evolve_bloch,
                         evolve_state, run_ensemble)
from .spin_algebra import (BlochTensorSet, SpinOperators, SpinValue,
                           build_spin_operators, decompose_density,
                           invariant_norms, reconstruct_density, tensor_operator)

__all__ = [
    "__version__",
    "SpinValue", "SpinOperators", "BlochTensorSet", "build_spin_operators",
    "tensor_operator", "decompose_density", "reconstruct_density", "invariant_norms",
    "LZParams", "SU2Amplitudes", "lz_amplitudes", "lanczos_gamma",
    "jacobi_polynomial", "rotation_matrix", "rotation_matrix_element",
    "node_count", "compose_amplitudes",
    "NoiseSpec", "NoisePath", "TimeGrid", "sample_path", "spectral_density_F",
    "spectral_density_G", "spectral_density_axis", "theta", "validate_fastness",
    "FastnessReport",
    "AveragedProfile", "TransitionMatrix", "gz_profile", "coherence_profile",
    "coherence_asymptote", "average_bloch_vector_full",
    "transition_probability_matrix", "fluctuation_spin_half", "fluctuation_tensor",
    "rank_decay", "rational_table",
    "AdiabaticConfig", "adiabatic_basis", "effective_rate", "adiabatic_survival",
    "ExperimentConfig", "Trajectory", "EnsembleResult", "EnsembleSummary",
    "evolve_state", "evolve_bloch", "run_ensemble", "ensemble_statistics",
    "SpinLZError", "DomainError", "ValidationError", "ConfigError", "NumericError",
]
