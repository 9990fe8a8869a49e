"""Closed-form SU(1,1) eigenstates and intelligent states with a Fock-space oracle."""
from .algebra import (
    AnalyticState,
    BetaVector,
    SpectralData,
    SpectrumClass,
    build_state_beta_plus_zero,
    build_state_general,
    classify_spectrum,
    spectral_data,
    theta_ratio,
    upsilon_ratio,
)
from .errors import ParameterError, SU11Error
from .fock import EVEN, ODD, FockVector, OperatorKind, Representation, build_operator, eigenstate_by_recursion, oracle_moments
from .moments import Family, FamilyParams, analytic_state, full_report, limit_check, oracle_report, oracle_state
from .report import MomentsReport, compare_reports
from .scheme import SchemeParams, apply_post_transform, run_pipeline, simulate_protocol
from .specfun import hyp2f1, hyp2f1_derivative_ratio, jacobi_poly

__version__ = "0.1.0"

__all__ = [
    "AnalyticState",
    "BetaVector",
    "EVEN",
    "Family",
    "FamilyParams",
    "FockVector",
    "MomentsReport",
    "ODD",
    "OperatorKind",
    "ParameterError",
    "Representation",
    "SU11Error",
    "SchemeParams",
    "SpectralData",
    "SpectrumClass",
    "analytic_state",
    "apply_post_transform",
    "build_operator",
    "build_state_beta_plus_zero",
    "build_state_general",
    "classify_spectrum",
    "compare_reports",
    "eigenstate_by_recursion",
    "full_report",
    "hyp2f1",
    "hyp2f1_derivative_ratio",
    "jacobi_poly",
    "limit_check",
    "oracle_moments",
    "oracle_report",
    "oracle_state",
    "run_pipeline",
    "simulate_protocol",
    "spectral_data",
    "theta_ratio",
    "upsilon_ratio",
]
