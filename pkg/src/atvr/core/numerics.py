"""
Dense linear-algebra helpers, spectral statistics, seeded randomness and
finite-difference gradient checks.

All arithmetic is float64. Singular values come from one-sided (Hestenes)
Jacobi rotations, which are accurate to a few ulps for the small dense
matrices used here (at most 128 x 128).
"""

import math
from collections.abc import Callable

import numpy as np

from atvr.core.errors import InvalidInputError, NumericError
from atvr.core.types import SpectralStats

_JACOBI_TOL = 1e-15
_JACOBI_MAX_SWEEPS = 60


def as_matrix(m: np.ndarray | list[list[float]]) -> np.ndarray:
    """Validate and convert to a finite, nonempty float64 matrix."""
    mat = np.asarray(m, dtype=np.float64)
    if mat.ndim != 2 or mat.size == 0:
        raise InvalidInputError("Expected a nonempty 2-D matrix", {"shape": mat.shape})
    if not np.all(np.isfinite(mat)):
        raise InvalidInputError("Matrix has non-finite entries")
    return mat


def as_vector(v: np.ndarray | list[float], dim: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate and convert to a float64 vector, optionally of fixed length."""
    vec = np.asarray(v, dtype=np.float64)
    if vec.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D", {"shape": vec.shape})
    if dim is not None and vec.shape[0] != dim:
        raise InvalidInputError(
            f"{name} has dimension {vec.shape[0]}, expected {dim}",
            {"dim": int(vec.shape[0]), "expected": dim},
        )
    return vec


def _jacobi_columns(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Orthogonalize the columns of m by plane rotations.

    Returns (column norms, rotated matrix Q = m V, accumulated rotations V).
    The column norms are the singular values of m when m has at least as many
    rows as columns.
    """
    a = np.array(m, dtype=np.float64, copy=True)
    cols = a.shape[1]
    v = np.eye(cols)

    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                ai = a[:, i]
                aj = a[:, j]
                alpha = float(ai @ ai)
                beta = float(aj @ aj)
                gamma = float(ai @ aj)
                if gamma == 0.0 or abs(gamma) <= _JACOBI_TOL * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t

                col_i = ai.copy()
                a[:, i] = c * col_i - s * aj
                a[:, j] = s * col_i + c * aj

                v_i = v[:, i].copy()
                v[:, i] = c * v_i - s * v[:, j]
                v[:, j] = s * v_i + c * v[:, j]
        if not rotated:
            break

    return np.linalg.norm(a, axis=0), a, v


def singular_values(m: np.ndarray) -> np.ndarray:
    """The min(rows, cols) singular values of m in descending order."""
    mat = as_matrix(m)
    oriented = mat if mat.shape[1] <= mat.shape[0] else mat.T
    norms, _, _ = _jacobi_columns(oriented)
    return np.sort(norms)[::-1]


def right_singular_vectors(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Singular values (descending) and matching unit right singular vectors.

    Returns (values, V) where V[:, k] pairs with values[k]; there are
    min(rows, cols) of each.
    """
    mat = as_matrix(m)
    rows, cols = mat.shape
    if cols <= rows:
        norms, _, v = _jacobi_columns(mat)
        order = np.argsort(-norms, kind="stable")
        return norms[order], v[:, order]

    # Wide matrix: rotate the transpose; its orthogonalized columns are
    # sigma_k times the right singular vectors of m.
    norms, q, _ = _jacobi_columns(mat.T)
    order = np.argsort(-norms, kind="stable")
    safe = np.where(norms > 0, norms, 1.0)
    return norms[order], (q / safe)[:, order]


def svd_spectrum(m: np.ndarray | list[list[float]]) -> SpectralStats:
    """
    Largest and smallest singular values and the condition number.

    The condition number is +inf when the smallest singular value is zero at
    working precision (relative to sigma_max).

    Raises:
        InvalidInputError: On empty or non-finite input
    """
    mat = as_matrix(m)
    values = singular_values(mat)
    sigma_max = float(values[0])
    sigma_min = float(values[-1])
    rank_tol = max(mat.shape) * np.finfo(np.float64).eps * sigma_max
    if sigma_min <= rank_tol:
        condition = math.inf
    else:
        condition = sigma_max / sigma_min
    return SpectralStats(sigma_max=sigma_max, sigma_min=sigma_min, condition_number=condition)


def finite_diff_check(
    fn: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    x: np.ndarray,
    step: float = 1e-5,
    floor: float = 1e-12,
) -> float:
    """
    Max relative error between an analytic gradient and central differences.

    Computes max_i |(fn(x + h e_i) - fn(x - h e_i)) / 2h - grad_i| / (|grad_i| + floor).

    Args:
        fn: Scalar field on vectors
        grad: Analytic gradient (callable evaluated at x, or a precomputed array)
        x: Point of evaluation (any shape; flattened coordinates are perturbed)
        step: Central-difference step h
        floor: Additive guard in the denominator

    Raises:
        InvalidInputError: If step is not positive
        NumericError: If fn or the gradient is non-finite
    """
    if not step > 0:
        raise InvalidInputError("Finite-difference step must be positive", {"step": step})

    x = np.array(x, dtype=np.float64, copy=True)
    analytic = np.asarray(grad(x) if callable(grad) else grad, dtype=np.float64).reshape(-1)
    if analytic.shape[0] != x.size:
        raise InvalidInputError(
            "Gradient size does not match x", {"grad": analytic.shape[0], "x": x.size}
        )
    if not np.all(np.isfinite(analytic)):
        raise NumericError("Analytic gradient is non-finite")

    flat = x.reshape(-1)
    worst = 0.0
    for i in range(flat.shape[0]):
        orig = flat[i]
        flat[i] = orig + step
        f_plus = float(fn(x))
        flat[i] = orig - step
        f_minus = float(fn(x))
        flat[i] = orig
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise NumericError("Non-finite function value during finite differences", {"coordinate": i})
        numeric = (f_plus - f_minus) / (2.0 * step)
        err = abs(numeric - analytic[i]) / (abs(analytic[i]) + floor)
        worst = max(worst, err)
    return worst


class RandomSource:
    """
    Seeded random stream with order-independent substreams.

    A substream is keyed by integers (sample index, epoch, purpose, ...) and
    derived from the root seed only, so drawing from one substream never
    shifts another.
    """

    def __init__(self, seed: int, keys: tuple[int, ...] = ()):
        if seed < 0 or any(k < 0 for k in keys):
            raise InvalidInputError("Seeds and substream keys must be non-negative", {"seed": seed})
        self.seed = int(seed)
        self.keys = tuple(int(k) for k in keys)
        self._generator: np.random.Generator | None = None

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, keys={self.keys})"

    @property
    def generator(self) -> np.random.Generator:
        # Built on first draw.
        if self._generator is None:
            sequence = np.random.SeedSequence(self.seed, spawn_key=self.keys)
            self._generator = np.random.Generator(np.random.PCG64(sequence))
        return self._generator

    def substream(self, *keys: int) -> "RandomSource":
        """Independent stream for (this stream's keys + keys)."""
        return RandomSource(self.seed, self.keys + tuple(keys))

    def for_sample(self, index: int) -> "RandomSource":
        return self.substream(index)

    def uniform(self, low: float, high: float, size: int | tuple[int, ...]) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def normal(self, size: int | tuple[int, ...], scale: float = 1.0) -> np.ndarray:
        return self.generator.normal(0.0, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def integers(self, low: int, high: int, size: int | tuple[int, ...] | None = None) -> np.ndarray:
        return self.generator.integers(low, high, size)
