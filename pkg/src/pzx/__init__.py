"""Pole-zero extraction for analog filters from sampled frequency responses."""

from .extract import (
    ComparisonReport,
    ExtractionReport,
    compare_pz,
    exp_to_rational,
    extract_pipeline,
    fit_magnitude_squared,
    fit_rational_complex,
    gaussian_to_rational,
)
from .filterzoo import Family, FilterSpec, list_families, make_filter, truth_pz
from .fitting import FitModel, FitResult, ModelKind, init_params, lm_fit, model_eval, model_jacobian, select_model
from .measure import (
    MeasurementConfig,
    SweepDataset,
    normalize_gain,
    parse_csv,
    plan_sweep,
    simulate_sweep,
    to_csv,
)
from .tfcore import PoleZeroSet, Polynomial, RationalTF, eval_tf, from_pole_zero, poles_zeros, roots

__version__ = "0.1.0"

__all__ = [
    "ComparisonReport",
    "ExtractionReport",
    "Family",
    "FilterSpec",
    "FitModel",
    "FitResult",
    "MeasurementConfig",
    "ModelKind",
    "PoleZeroSet",
    "Polynomial",
    "RationalTF",
    "SweepDataset",
    "compare_pz",
    "eval_tf",
    "exp_to_rational",
    "extract_pipeline",
    "fit_magnitude_squared",
    "fit_rational_complex",
    "from_pole_zero",
    "gaussian_to_rational",
    "init_params",
    "list_families",
    "lm_fit",
    "make_filter",
    "model_eval",
    "model_jacobian",
    "normalize_gain",
    "parse_csv",
    "plan_sweep",
    "poles_zeros",
    "roots",
    "select_model",
    "simulate_sweep",
    "to_csv",
    "truth_pz",
]
