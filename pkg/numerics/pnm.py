"""
Gaussian-process collocation for linear differential operators in one
spatial dimension.

A zero-mean GP prior on u with squared-exponential covariance induces a
joint Gaussian over u and L u for any linear L = c0 + c1 d/ds + c2 d2/ds2.
Forcing values are treated as noisy observations of L u and boundary values
as (almost) noiseless observations of u.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import hermite_e
from scipy import linalg

from core.exceptions import InvalidArgumentError
from numerics.random_fields import cholesky_with_jitter
from schema.kernel import KernelFamily, KernelSpec
from schema.pnm import LinearOperatorSpec, PoissonDemoSettings
from schema.reports import PoissonDemoReport

logger = logging.getLogger(__name__)

BOUNDARY_NOISE_VAR = 1e-10
CONSISTENCY_SIGMAS = 3.0


@dataclass(frozen=True)
class OperatorKernel:
    """Covariances between u and L u under a squared-exponential prior on u."""

    kernel: KernelSpec
    op: LinearOperatorSpec

    def derivative(self, r: np.ndarray, order: int) -> np.ndarray:
        """d^m/dr^m of sigma^2 exp(-r^2 / 2 l^2) via probabilists' Hermite polynomials."""
        ell = self.kernel.length_scale
        x = np.asarray(r, dtype=float) / ell
        he = hermite_e.hermeval(x, [0.0] * order + [1.0])
        return self.kernel.variance * (-1.0) ** order * ell ** (-order) * he * np.exp(-0.5 * x**2)

    @staticmethod
    def _lags(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.subtract.outer(np.ravel(a).astype(float), np.ravel(b).astype(float))

    def k_uu(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.derivative(self._lags(a, b), 0)

    def k_uf(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """cov(u(a), L u(b)): operator applied in the second argument."""
        r = self._lags(a, b)
        return sum(c * (-1.0) ** m * self.derivative(r, m) for m, c in enumerate(self.op.coefficients) if c)

    def k_fu(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """cov(L u(a), u(b))."""
        r = self._lags(a, b)
        return sum(c * self.derivative(r, m) for m, c in enumerate(self.op.coefficients) if c)

    def k_ff(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        r = self._lags(a, b)
        out = np.zeros_like(r)
        coefficients = self.op.coefficients
        for i, ci in enumerate(coefficients):
            for j, cj in enumerate(coefficients):
                if ci and cj:
                    out += ci * cj * (-1.0) ** j * self.derivative(r, i + j)
        return out


def operator_kernel(kernel: KernelSpec, op: LinearOperatorSpec) -> OperatorKernel:
    if kernel.family is not KernelFamily.SQUARED_EXPONENTIAL_SPACE:
        raise InvalidArgumentError(
            f"operator kernels need a squared-exponential base kernel, got {kernel.family.value}"
        )
    return OperatorKernel(kernel, op)


@dataclass(frozen=True, eq=False)
class PNMPosterior:
    query: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    collocation: np.ndarray
    forcing: np.ndarray
    forcing_mean: np.ndarray
    forcing_var: np.ndarray
    noise_var: float

    @cached_property
    def std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    def consistency_margin(self) -> np.ndarray:
        """|L mean - f| in units of the predictive std of the forcing observations."""
        scale = np.sqrt(np.clip(self.forcing_var, 0.0, None) + self.noise_var)
        scale = np.where(scale > 0, scale, np.finfo(float).tiny)
        return np.abs(self.forcing_mean - self.forcing) / scale

    @property
    def consistent(self) -> bool:
        return bool(np.all(self.consistency_margin() <= CONSISTENCY_SIGMAS))


def pnm_solve(
    op: LinearOperatorSpec,
    collocation: np.ndarray,
    forcing: np.ndarray,
    noise_var: float,
    boundary_points: np.ndarray,
    boundary_values: np.ndarray,
    kernel: KernelSpec,
    query: np.ndarray,
) -> PNMPosterior:
    """Posterior of u at ``query`` given L u(collocation) = forcing + noise and u(boundary) = values."""
    collocation = np.ravel(np.asarray(collocation, dtype=float))
    forcing = np.ravel(np.asarray(forcing, dtype=float))
    boundary_points = np.ravel(np.asarray(boundary_points, dtype=float))
    boundary_values = np.ravel(np.asarray(boundary_values, dtype=float))
    query = np.ravel(np.asarray(query, dtype=float))
    if forcing.size != collocation.size:
        raise InvalidArgumentError("one forcing value per collocation point is required")
    if boundary_values.size != boundary_points.size:
        raise InvalidArgumentError("one boundary value per boundary point is required")
    if noise_var < 0:
        raise InvalidArgumentError(f"noise_var must be non-negative, got {noise_var}")

    ok = operator_kernel(kernel, op)
    n_f = collocation.size

    gram = np.block(
        [
            [ok.k_ff(collocation, collocation) + noise_var * np.eye(n_f), ok.k_fu(collocation, boundary_points)],
            [ok.k_uf(boundary_points, collocation),
             ok.k_uu(boundary_points, boundary_points) + BOUNDARY_NOISE_VAR * np.eye(boundary_points.size)],
        ]
    )
    gram = 0.5 * (gram + gram.T)
    L, _ = cholesky_with_jitter(gram, scale=float(np.mean(np.diag(gram))))
    data = np.concatenate([forcing, boundary_values])
    alpha = linalg.cho_solve((L, True), data)

    cross_u = np.hstack([ok.k_uf(query, collocation), ok.k_uu(query, boundary_points)])
    V_u = linalg.solve_triangular(L, cross_u.T, lower=True)
    mean = cross_u @ alpha
    cov = ok.k_uu(query, query) - V_u.T @ V_u

    cross_f = np.hstack([ok.k_ff(collocation, collocation), ok.k_fu(collocation, boundary_points)])
    V_f = linalg.solve_triangular(L, cross_f.T, lower=True)
    forcing_mean = cross_f @ alpha
    forcing_var = np.diag(ok.k_ff(collocation, collocation)) - np.sum(V_f**2, axis=0)

    logger.debug("PNM solve: %d collocation, %d boundary, %d query points", n_f, boundary_points.size, query.size)
    return PNMPosterior(
        query=query,
        mean=mean,
        cov=0.5 * (cov + cov.T),
        collocation=collocation,
        forcing=forcing,
        forcing_mean=forcing_mean,
        forcing_var=forcing_var,
        noise_var=float(noise_var),
    )


def poisson_solution(s: np.ndarray, forcing: float) -> np.ndarray:
    """Exact solution of -u'' = forcing on [0, 1] with u(0) = u(1) = 0."""
    s = np.asarray(s, dtype=float)
    return 0.5 * forcing * s * (1.0 - s)


def poisson_demo(settings: PoissonDemoSettings) -> tuple[PNMPosterior, PoissonDemoReport]:
    collocation = np.linspace(0.0, 1.0, settings.n_collocation)
    query = np.linspace(0.0, 1.0, settings.n_query)
    posterior = pnm_solve(
        LinearOperatorSpec.negative_laplacian(),
        collocation,
        np.full(collocation.size, settings.forcing),
        settings.noise_var,
        np.array([0.0, 1.0]),
        np.zeros(2),
        KernelSpec.squared_exponential(settings.kernel_variance, settings.kernel_length_scale),
        query,
    )
    report = PoissonDemoReport(
        max_abs_error=float(np.max(np.abs(posterior.mean - poisson_solution(query, settings.forcing)))),
        max_posterior_std=float(np.max(posterior.std)),
        consistent=posterior.consistent,
        n_collocation=settings.n_collocation,
    )
    logger.info("Poisson demo: max abs error %.3e, consistent=%s", report.max_abs_error, report.consistent)
    return posterior, report
