"""Variation estimators."""

from atvr.variation.distances import Distance, L2Distance, RandomLinearDistance
from atvr.variation.exact import variation_bounds, variation_exact_linear
from atvr.variation.fast_lpv import fast_lpv
from atvr.variation.hausdorff import HausdorffConfig, hausdorff_estimate
from atvr.variation.pgd import variation_pgd
from atvr.variation.union import dataset_variation, union_variation

__all__ = [
    "Distance",
    "HausdorffConfig",
    "L2Distance",
    "RandomLinearDistance",
    "dataset_variation",
    "fast_lpv",
    "hausdorff_estimate",
    "union_variation",
    "variation_bounds",
    "variation_exact_linear",
    "variation_pgd",
]
