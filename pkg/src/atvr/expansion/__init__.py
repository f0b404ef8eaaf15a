"""Expansion functions and generalization bounds."""

from atvr.expansion.bounds import CE_LIPSCHITZ, hausdorff_gap_bound, variation_gap_bound
from atvr.expansion.fit import fit_min_slope
from atvr.expansion.slopes import (
    SlopeFormula,
    predict_target_loss,
    theoretical_slope_cross_norm,
    theoretical_slope_same_norm,
)

__all__ = [
    "CE_LIPSCHITZ",
    "SlopeFormula",
    "fit_min_slope",
    "hausdorff_gap_bound",
    "predict_target_loss",
    "theoretical_slope_cross_norm",
    "theoretical_slope_same_norm",
    "variation_gap_bound",
]
