"""Three coupled harmonic oscillators in a common bath: noiseless subsystems,
Gaussian dynamics, entanglement, discord and synchronisation."""

__version__ = "0.1.0"

from .errors import (ThreeOscError, ValidationError, NumericalError,
                     PositivityError, CutoffViolation, BranchUndefined,
                     NotOnManifold, NonPhysical, SymmetryViolated,
                     BasisMismatch, RegimeError, WindowError, DegenerateError)
from .lattice import (SystemParams, NormalModes, BathParams, build_hamiltonian,
                      normal_modes, decay_ratio)
from .ns import (constraint_residual, delta_mode, two_mode_check,
                 tuned_parameters, place_on_manifold, classify, ns_report)
from .dynamics import (GaussianState, MmeCoefficients, squeezed_vacuum,
                       change_basis, mme_coefficients, propagate,
                       propagate_series, natural_series, thermal_state)
from .correlations import (PairCovariance, TimeSeries, reduce_pair,
                           min_symplectic_eig, log_negativity,
                           gaussian_discord, sync_indicator, gaussian_smooth)
from .asymptotics import (OneModeNsSpec, TwoModeNsSpec, sigma_coefficients,
                          critical_squeezings, one_mode_nu,
                          one_mode_entanglement, entanglement_extremes,
                          phase_classify, two_mode_nu)

__all__ = [
    "ThreeOscError", "ValidationError", "NumericalError", "PositivityError",
    "CutoffViolation", "BranchUndefined", "NotOnManifold", "NonPhysical",
    "SymmetryViolated", "BasisMismatch", "RegimeError", "WindowError",
    "DegenerateError", "SystemParams", "NormalModes", "BathParams", "build_hamiltonian",
    "normal_modes", "decay_ratio", "constraint_residual", "delta_mode",
    "two_mode_check", "tuned_parameters", "place_on_manifold", "classify", "ns_report",
    "GaussianState", "MmeCoefficients", "squeezed_vacuum", "change_basis",
    "mme_coefficients", "propagate", "propagate_series", "natural_series",
    "thermal_state", "PairCovariance", "TimeSeries", "reduce_pair",
    "min_symplectic_eig", "log_negativity", "gaussian_discord", "sync_indicator",
    "gaussian_smooth", "OneModeNsSpec", "TwoModeNsSpec", "sigma_coefficients",
    "critical_squeezings", "one_mode_nu", "one_mode_entanglement",
    "entanglement_extremes", "phase_classify", "two_mode_nu",
]
