"""Stable H-infinity sensitivity controllers for plants with dead time."""

from .envelope import EnvelopeWeight, build_envelope, check_dominance, select_alpha1
from .errors import HinfDelayError
from .pipeline import SynthesisConfig, SynthesisResult, synthesize
from .quasipoly import DelayTransferFunction, Polynomial, QuasiPolynomial
from .sensopt import (PlantSpec, WeightSpec, solve_gamma_opt, solve_optimal_sensitivity)
from .strongstab import DeviationParams, certify, solve_deviation, solve_gamma2
from .winding import FrequencyGrid, crossing_profile, winding_number
from .youla import coprime_factorization, parameterize_controller, solve_bezout

__all__ = [
    "DelayTransferFunction", "DeviationParams", "EnvelopeWeight", "FrequencyGrid",
    "HinfDelayError", "PlantSpec", "Polynomial", "QuasiPolynomial", "SynthesisConfig",
    "SynthesisResult", "WeightSpec", "build_envelope", "certify", "check_dominance",
    "coprime_factorization", "crossing_profile", "parameterize_controller", "select_alpha1",
    "solve_bezout", "solve_deviation", "solve_gamma2", "solve_gamma_opt",
    "solve_optimal_sensitivity", "synthesize", "winding_number",
]
