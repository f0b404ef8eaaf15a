"""
Exact variation and closed-form bounds for linear extractors h(x) = Wx + b1.

For linear h the variation over a ball is 2 * eps * max_{||u||_p <= 1} ||Wu||_2
and does not depend on the anchor.
"""

import math

import numpy as np

from atvr.core.errors import CapacityError, InvalidInputError
from atvr.core.numerics import as_matrix, right_singular_vectors, svd_spectrum
from atvr.core.types import VariationBounds, VariationEstimate
from atvr.threats.base import Ball, Norm, ThreatModel

MAX_VERTEX_DIM = 20
_VERTEX_CHUNK = 1 << 15


def _max_vertex(W: np.ndarray) -> tuple[float, np.ndarray]:
    """max ||W s||_2 over s in {-1, 1}^n, fixing s_0 = +1 by symmetry."""
    n = W.shape[1]
    if n > MAX_VERTEX_DIM:
        raise CapacityError(
            f"Vertex enumeration supports at most {MAX_VERTEX_DIM} inputs; use variation_pgd",
            {"input_dim": n},
        )
    total = 1 << (n - 1)
    shifts = np.arange(n - 1, dtype=np.int64)
    best_value = -1.0
    best_signs = np.ones(n)
    for start in range(0, total, _VERTEX_CHUNK):
        index = np.arange(start, min(start + _VERTEX_CHUNK, total), dtype=np.int64)
        bits = (index[:, None] >> shifts) & 1
        signs = np.ones((index.shape[0], n))
        signs[:, 1:] = 1.0 - 2.0 * bits
        norms = np.linalg.norm(signs @ W.T, axis=1)
        i = int(np.argmax(norms))
        if norms[i] > best_value:
            best_value = float(norms[i])
            best_signs = signs[i]
    return best_value, best_signs


def unit_maximizer(W: np.ndarray, p: Norm) -> tuple[float, np.ndarray, str]:
    """
    max_{||u||_p <= 1} ||Wu||_2 with its maximizer.

    Returns:
        (value, u, method tag)
    """
    W = as_matrix(W)
    if p is Norm.L2:
        values, V = right_singular_vectors(W)
        return float(values[0]), V[:, 0], "exact_closed_form"
    if p is Norm.L1:
        column_norms = np.linalg.norm(W, axis=0)
        j = int(np.argmax(column_norms))
        u = np.zeros(W.shape[1])
        u[j] = 1.0
        return float(column_norms[j]), u, "exact_closed_form"
    value, signs = _max_vertex(W)
    return value, signs, "vertex_enum"


def variation_exact_linear(
    W: np.ndarray, ball: Ball, anchor: np.ndarray | None = None
) -> VariationEstimate:
    """
    Exact variation of h(x) = Wx + b over an l_p ball.

    l2: 2 eps sigma_max(W). l1: 2 eps max_j ||W[:, j]||_2.
    linf: 2 eps max over hypercube vertices of ||W s||_2 (n <= 20).

    The witness pair is anchor +/- eps * u for the maximizing direction u,
    anchored at the origin unless an anchor is given.

    Raises:
        CapacityError: For linf with more than 20 inputs
    """
    W = as_matrix(W)
    n = W.shape[1]
    base = np.zeros(n) if anchor is None else np.asarray(anchor, dtype=np.float64)
    if base.shape != (n,):
        raise InvalidInputError("Anchor dimension does not match W", {"anchor": base.shape, "n": n})
    if ball.eps == 0.0:
        return VariationEstimate(value=0.0, x1=base.copy(), x2=base.copy(), method="exact_closed_form")
    unit_value, u, method = unit_maximizer(W, ball.p)
    return VariationEstimate(
        value=2.0 * ball.eps * unit_value,
        x1=base + ball.eps * u,
        x2=base - ball.eps * u,
        method=method,  # type: ignore[arg-type]
    )


def exact_available(W_or_dim: np.ndarray | int, ball: Ball) -> bool:
    n = W_or_dim if isinstance(W_or_dim, int) else as_matrix(W_or_dim).shape[1]
    return ball.p is not Norm.LINF or n <= MAX_VERTEX_DIM


def _ball_bounds(W: np.ndarray, ball: Ball, n: int) -> VariationBounds:
    stats = svd_spectrum(W)
    scale = 2.0 * ball.eps
    if ball.p is Norm.LINF:
        upper = scale * math.sqrt(n) * stats.sigma_max
    else:
        upper = scale * stats.sigma_max

    # ||W d|| >= sigma_min ||d|| needs a trivial kernel.
    lower: float | None = None
    if not stats.is_rank_deficient and n <= W.shape[0]:
        lower = scale * stats.sigma_min
        if ball.p is Norm.L1:
            lower /= math.sqrt(n)
    return VariationBounds(upper=upper, lower=lower)


def variation_bounds(W: np.ndarray, tm: Ball | ThreatModel, n: int | None = None) -> VariationBounds:
    """
    Upper and lower bounds on the variation of a linear extractor.

    upper: 2 eps sigma_max(W) for p in {1, 2}, 2 eps sqrt(n) sigma_max(W) for linf.
    lower: 2 eps sigma_min(W) for p in {2, inf}, 2 eps sigma_min(W) / sqrt(n) for l1;
    None when W has a nontrivial kernel. For unions both bounds are the
    maximum over members.
    """
    W = as_matrix(W)
    n = W.shape[1] if n is None else n
    if n != W.shape[1]:
        raise InvalidInputError("n must equal the number of columns of W", {"n": n, "cols": W.shape[1]})
    members = [tm] if isinstance(tm, Ball) else tm.members
    per_member = [_ball_bounds(W, ball, n) for ball in members]
    lowers = [b.lower for b in per_member if b.lower is not None]
    return VariationBounds(
        upper=max(b.upper for b in per_member),
        lower=max(lowers) if lowers else None,
    )
