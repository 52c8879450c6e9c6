"""Exponential utility maximisation for Gaussian increments observed with a delay."""

__version__ = "0.1.0"

from .decomposition import (
    BandDecomposition,
    decompose,
    decompose_closed_form_d0,
    decompose_closed_form_d1,
)
from .errors import (
    DelayHedgeError,
    DimensionMismatch,
    InvalidParameter,
    InvalidRange,
    NotPositiveDefinite,
    ParseError,
    ResultNotPD,
    SingularPrincipalMinor,
    UtilityDiverges,
)
from .estimator import DelayHedger
from .hedging import (
    LinearStrategy,
    ValueReport,
    evaluate_linear_strategy,
    optimal_strategy,
    optimal_value,
    solve,
    value_closed_form_kms,
)
from .models import FbmSpec, MarketModel, fbm_model, kms_model, load_model, parse_model
from .montecarlo import SimBatch, delayed_martingale_check, mc_expected_utility, qhat_weights, simulate

__all__ = [
    "BandDecomposition", "DelayHedgeError", "DelayHedger", "DimensionMismatch", "FbmSpec",
    "InvalidParameter", "InvalidRange", "LinearStrategy", "MarketModel", "NotPositiveDefinite",
    "ParseError", "ResultNotPD", "SimBatch", "SingularPrincipalMinor", "UtilityDiverges",
    "ValueReport", "decompose", "decompose_closed_form_d0", "decompose_closed_form_d1",
    "delayed_martingale_check", "evaluate_linear_strategy", "fbm_model", "kms_model", "load_model",
    "mc_expected_utility", "optimal_strategy", "optimal_value", "parse_model", "qhat_weights",
    "simulate", "solve", "value_closed_form_kms",
]
