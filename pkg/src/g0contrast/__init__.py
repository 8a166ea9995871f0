"""G0 speckle model: fitting, stochastic distances and region contrast tests."""

__version__ = "0.1.0"

from .distances import (ALL_KINDS, DistanceKind, EvalMethod, closed_form_distance, distance,
                        distance_curve, distances, divergence_hphi, parse_kind, renyi)
from .estimation import FitResult, G0Estimator, censor_accept, fit_ml, log_likelihood, sanity_ok, score
from .exceptions import (DegenerateResultError, DomainError, EstimationError, G0Error, PoleError,
                         QuadratureError, TestUnavailableError, UnsupportedRegionError)
from .model import (G0Params, Sample, g0_log_pdf, g0_moment, g0_pdf, gamma_from_mean, mu_from_params,
                    sample_g0)
from .testing import TestOutcome, p_value, statistic, test_samples, v_constant

__all__ = [
    "ALL_KINDS", "DistanceKind", "EvalMethod", "closed_form_distance", "distance", "distance_curve",
    "distances", "divergence_hphi", "parse_kind", "renyi",
    "FitResult", "G0Estimator", "censor_accept", "fit_ml", "log_likelihood", "sanity_ok", "score",
    "DegenerateResultError", "DomainError", "EstimationError", "G0Error", "PoleError",
    "QuadratureError", "TestUnavailableError", "UnsupportedRegionError",
    "G0Params", "Sample", "g0_log_pdf", "g0_moment", "g0_pdf", "gamma_from_mean", "mu_from_params",
    "sample_g0",
    "TestOutcome", "p_value", "statistic", "test_samples", "v_constant",
]
