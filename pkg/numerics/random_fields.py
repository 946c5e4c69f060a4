"""
Gaussian-process kernels, exact sampling and conditioning.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from core.exceptions import FactorizationError, InvalidArgumentError
from schema.kernel import KernelFamily, KernelSpec

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-4
JITTER_FACTOR = 10.0


@dataclass(frozen=True)
class GPSample:
    values: np.ndarray
    seed: int


def _as_points(points, family: KernelFamily) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidArgumentError("point list must be a nonempty 1-D or 2-D array")
    if family is KernelFamily.SQUARED_EXPONENTIAL_SPACE:
        # spatial kernel: only the first coordinate enters
        pts = pts[:, :1]
    return pts


def cov_matrix(kernel: KernelSpec, points_a, points_b) -> np.ndarray:
    """Pairwise kernel evaluations k(a_i, b_j)."""
    a = _as_points(points_a, kernel.family)
    b = _as_points(points_b, kernel.family)

    if kernel.family is KernelFamily.EXPONENTIAL_SPACETIME:
        dist = cdist(a, b, metric="euclidean")
        K = kernel.variance * np.exp(-dist / kernel.length_scale)
    elif kernel.family is KernelFamily.SQUARED_EXPONENTIAL_SPACE:
        sq = cdist(a, b, metric="sqeuclidean")
        K = kernel.variance * np.exp(-0.5 * sq / kernel.length_scale**2)
    else:  # pragma: no cover - enum is closed
        raise InvalidArgumentError(f"unsupported kernel family {kernel.family}")

    if a.shape == b.shape and np.array_equal(a, b):
        K = 0.5 * (K + K.T)
    return K


def cholesky_with_jitter(
    K: np.ndarray, scale: float | None = None, time_index: int | None = None
) -> tuple[np.ndarray, float]:
    """
    Lower Cholesky factor of K, adding jitter * scale to the diagonal when needed.

    Tries no jitter first, then 1e-10 * scale escalating by 10x up to 1e-4 * scale.
    Returns the factor and the jitter actually added.
    """
    K = np.asarray(K, dtype=float)
    if scale is None:
        scale = float(np.mean(np.diag(K))) if K.size else 1.0
    scale = max(scale, np.finfo(float).tiny)

    jitter = 0.0
    next_jitter = JITTER_START
    while True:
        try:
            L = linalg.cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
            if jitter > 0:
                logger.warning(
                    "Cholesky needed jitter %.1e (relative)", jitter / scale,
                    extra={"time_index": time_index},
                )
            return L, jitter
        except linalg.LinAlgError:
            if next_jitter > JITTER_MAX * (1 + 1e-9):
                raise FactorizationError(
                    "covariance not factorizable after jitter escalation",
                    time_index=time_index,
                    details={"max_relative_jitter": JITTER_MAX},
                ) from None
            jitter = next_jitter * scale
            next_jitter *= JITTER_FACTOR


def sample_gp(kernel: KernelSpec, points, seed: int) -> GPSample:
    """Zero-mean GP draw L z with z ~ N(0, I) from the seeded generator."""
    K = cov_matrix(kernel, points, points)
    L, _ = cholesky_with_jitter(K, scale=kernel.variance)
    z = np.random.default_rng(seed).standard_normal(K.shape[0])
    return GPSample(values=L @ z, seed=seed)


def gp_condition(
    kernel: KernelSpec,
    train_points,
    train_values,
    noise_var: float,
    query_points,
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance at query points given noisy training values."""
    if noise_var < 0:
        raise InvalidArgumentError(f"noise_var must be non-negative, got {noise_var}")

    K_qq = cov_matrix(kernel, query_points, query_points)
    train_values = np.asarray(train_values, dtype=float).ravel()
    if train_values.size == 0:
        return np.zeros(K_qq.shape[0]), K_qq

    K_tt = cov_matrix(kernel, train_points, train_points)
    K_qt = cov_matrix(kernel, query_points, train_points)
    if K_tt.shape[0] != train_values.size:
        raise InvalidArgumentError("train_points and train_values differ in length")

    L, _ = cholesky_with_jitter(K_tt + noise_var * np.eye(K_tt.shape[0]), scale=kernel.variance)
    alpha = linalg.cho_solve((L, True), train_values)
    V = linalg.solve_triangular(L, K_qt.T, lower=True)

    mean = K_qt @ alpha
    cov = K_qq - V.T @ V
    return mean, 0.5 * (cov + cov.T)
