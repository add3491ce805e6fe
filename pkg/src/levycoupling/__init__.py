"""Simulation and numerical-verification lab for three-branch jump couplings
of SDEs driven by multiplicative pure-jump Levy noise."""

from .levy import LevyModel, MomentIntegrals, SUPPORT_VARIANTS
from .coefficients import (
    CoefficientField,
    DissipativityProfile,
    dissipativity_check,
    verify_structure,
)
from .kernel import CouplingKernel, ThinningDecision, clipped_difference
from .testfns import (
    RadialTestFunction,
    SmoothTestFunction,
    PairTestFunction,
    capped_identity,
    capped_power,
    capped_log_linear,
    gaussian_bump,
    cosine_wave,
)
from .generator import (
    generator_L,
    coupling_generator,
    marginality_suite,
    drift_bound_check,
    DriftBoundReport,
)
from .simulate import (
    SimConfig,
    CoupledPath,
    simulate_marginal,
    simulate_coupled,
    coupling_time_ensemble,
    marginal_law_consistency,
)
from .rates import (
    RateCertificate,
    estimate_J_K,
    gradient_rate_certificate,
    contraction_certificate,
    fit_decay,
    tv_and_w1_report,
    lyapunov_check,
    invariant_measure_probe,
)
from .quadrature import QuadOptions

__version__ = "0.1.0"

__all__ = [
    "LevyModel",
    "MomentIntegrals",
    "SUPPORT_VARIANTS",
    "CoefficientField",
    "DissipativityProfile",
    "dissipativity_check",
    "verify_structure",
    "CouplingKernel",
    "ThinningDecision",
    "clipped_difference",
    "RadialTestFunction",
    "SmoothTestFunction",
    "PairTestFunction",
    "capped_identity",
    "capped_power",
    "capped_log_linear",
    "gaussian_bump",
    "cosine_wave",
    "generator_L",
    "coupling_generator",
    "marginality_suite",
    "drift_bound_check",
    "DriftBoundReport",
    "SimConfig",
    "CoupledPath",
    "simulate_marginal",
    "simulate_coupled",
    "coupling_time_ensemble",
    "marginal_law_consistency",
    "RateCertificate",
    "estimate_J_K",
    "gradient_rate_certificate",
    "contraction_certificate",
    "fit_decay",
    "tv_and_w1_report",
    "lyapunov_check",
    "invariant_measure_probe",
    "QuadOptions",
    "__version__",
]
