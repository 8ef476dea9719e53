"""Random-matrix models of decay into a quasicontinuum.

Rank-1 and multilevel effective-Hamiltonian models, their exact spectra
and smoothed spectral densities, ensemble fluctuation statistics, the
Cauchy fixed point and renormalization-group flows towards it.
"""
__version__ = "0.1.0"

from .errors import ConfigError, NumericalError, QcdecayError, ResourceCapError
from .model import (Couplings, DecayModel, DerivedParams, RandomSeed, Spectrum, build_rank1_model,
                    derived_params, make_spectrum, rank1_model, sample_couplings)
from .resolvent import (DensityCurve, Eigensystem, averaged_density, distribution_function,
                        effective_hamiltonian, eigensystem, ergodic_plateau, spectral_density_eigen,
                        spectral_density_schur, survival_amplitude, window_j, window_k)
from .cauchy import CauchyParams, StepDistribution, cauchy_cdf, cauchy_pdf, iterate_cf_limit
from .stats import EnsembleSummary, RateFit, ensemble_imh_stats, fit_decay_rate, kappa, ks_distance
from .rg import RgFlowReport, double_model, rg_flow, scale_model, tail_function
from .fano import GoldenRuleMatrix, MultiModel, golden_rule_matrix, lineshape, multilevel_density
from .fullrandom import FullModel, basis_state_distribution, build_full_model

__all__ = [
    "__version__",
    "QcdecayError", "ConfigError", "NumericalError", "ResourceCapError",
    "RandomSeed", "Spectrum", "Couplings", "DecayModel", "DerivedParams",
    "make_spectrum", "sample_couplings", "derived_params", "build_rank1_model", "rank1_model",
    "Eigensystem", "DensityCurve", "effective_hamiltonian", "spectral_density_schur",
    "eigensystem", "spectral_density_eigen", "distribution_function", "survival_amplitude",
    "window_j", "window_k", "averaged_density", "ergodic_plateau",
    "CauchyParams", "StepDistribution", "cauchy_pdf", "cauchy_cdf", "iterate_cf_limit",
    "EnsembleSummary", "RateFit", "ensemble_imh_stats", "kappa", "ks_distance", "fit_decay_rate",
    "RgFlowReport", "scale_model", "double_model", "rg_flow", "tail_function",
    "MultiModel", "GoldenRuleMatrix", "golden_rule_matrix", "multilevel_density", "lineshape",
    "FullModel", "build_full_model", "basis_state_distribution",
]
