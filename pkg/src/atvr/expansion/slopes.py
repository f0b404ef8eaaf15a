"""
Theoretical expansion slopes for linear extractors with condition number at
most B, and target-loss prediction from a source measurement.
"""

import math
from dataclasses import dataclass

from atvr.core.errors import InvalidInputError
from atvr.threats.base import Norm


def dim_factor(p: Norm, n: int) -> float:
    """n^(1/2 - 1/p) for p > 2 (sqrt(n) for linf), 1 otherwise."""
    return math.sqrt(n) if p is Norm.LINF else 1.0


@dataclass(frozen=True)
class SlopeFormula:
    p: Norm
    q: Norm
    eps1: float
    eps2: float
    n: int
    B: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", Norm.parse(self.p))
        object.__setattr__(self, "q", Norm.parse(self.q))
        if not self.eps1 > 0 or not math.isfinite(self.eps1):
            raise InvalidInputError("eps1 must be positive", {"eps1": self.eps1})
        if self.eps2 < 0 or not math.isfinite(self.eps2):
            raise InvalidInputError("eps2 must be non-negative", {"eps2": self.eps2})
        if self.n < 1:
            raise InvalidInputError("n must be positive", {"n": self.n})
        if not self.B >= 1 or math.isnan(self.B):
            raise InvalidInputError("Condition-number bound B must be >= 1", {"B": self.B})


def theoretical_slope_same_norm(f: SlopeFormula) -> float:
    """
    Slope for an l_p source of radius eps1 and l_p target of radius eps2 >= eps1:
    sqrt(n) B eps2/eps1 (l1), B eps2/eps1 (l2), sqrt(n) B eps2/eps1 (linf).
    """
    if f.p is not f.q:
        raise InvalidInputError("Same-norm slope needs p == q", {"p": f.p.value, "q": f.q.value})
    if f.eps2 < f.eps1:
        raise InvalidInputError("Target radius must be at least the source radius")
    ratio = f.B * f.eps2 / f.eps1
    if f.p is Norm.L2:
        return ratio
    return math.sqrt(f.n) * ratio


def theoretical_slope_cross_norm(f: SlopeFormula) -> float:
    """
    Slope for an l_p source (eps1) and the target union of the source with an
    l_q ball (eps2). Equal norms reduce to the same-norm slope at
    max(eps1, eps2).
    """
    if f.p is f.q:
        return theoretical_slope_same_norm(
            SlopeFormula(p=f.p, q=f.q, eps1=f.eps1, eps2=max(f.eps1, f.eps2), n=f.n, B=f.B)
        )
    # Lower bound on the source variation, divided by 2 eps1 sigma_min.
    source_scale = math.sqrt(f.n) if f.p is Norm.L1 else 1.0
    # Upper bound on the union variation, divided by 2 sigma_max.
    reach = max(dim_factor(f.q, f.n) * f.eps2, dim_factor(f.p, f.n) * f.eps1)
    return source_scale * f.B * reach / f.eps1


def predict_target_loss(
    source_loss: float, source_variation: float, rho: float, sigma_g: float, slope: float
) -> float:
    """source_loss + rho * sigma_g * slope * source_variation."""
    if min(source_loss, source_variation, rho, sigma_g) < 0:
        raise InvalidInputError("Loss prediction inputs must be non-negative")
    if slope < 1:
        raise InvalidInputError("Expansion slope must be at least 1", {"slope": slope})
    return source_loss + rho * sigma_g * slope * source_variation
