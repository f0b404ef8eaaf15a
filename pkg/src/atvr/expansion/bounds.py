"""Right-hand sides of the threat-model generalization bounds."""

import math

from atvr.core.errors import InvalidInputError

# Lipschitz constant of softmax cross-entropy w.r.t. the logits (l2).
CE_LIPSCHITZ = math.sqrt(2.0)


def variation_gap_bound(rho: float, sigma_g: float, target_variation: float) -> float:
    """L_T - L_S <= rho * sigma_G * V(h, T)."""
    if min(rho, sigma_g, target_variation) < 0:
        raise InvalidInputError("Bound inputs must be non-negative")
    return rho * sigma_g * target_variation


def hausdorff_gap_bound(rho: float, sigma_g: float, hausdorff: float) -> float:
    """L_T - L_S <= rho * sigma_G * H(T, S), the tighter form."""
    if min(rho, sigma_g, hausdorff) < 0:
        raise InvalidInputError("Bound inputs must be non-negative")
    return rho * sigma_g * hausdorff
