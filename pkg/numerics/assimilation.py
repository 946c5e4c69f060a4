"""
Classical data-assimilation baselines.

Time indexing: ``window[k]`` holds the observation at grid time k (or None).
The state at time 0 is the initial condition; u_{k+1} = M(u_k) (+ eta_{k+1}
in weak-constraint mode).
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from scipy import linalg, optimize

from core.exceptions import FactorizationError, InvalidArgumentError, OptimizationError
from numerics import autodiff as ad
from numerics.random_fields import cholesky_with_jitter, cov_matrix
from schema.assimilation import AssimConfig, ObservationStep
from schema.kernel import KernelSpec

logger = logging.getLogger(__name__)

Mode = Literal["strong", "weak"]
Model = Callable[[Any], Any]


def _factor(S: np.ndarray, what: str, time_index: int | None = None) -> tuple[np.ndarray, bool]:
    try:
        return linalg.cho_factor(S, lower=True)
    except linalg.LinAlgError as exc:
        raise FactorizationError(f"{what} is not positive definite", time_index) from exc


def _precision(S: np.ndarray, what: str) -> np.ndarray:
    inv = linalg.cho_solve(_factor(S, what), np.eye(S.shape[0]))
    return 0.5 * (inv + inv.T)


def _has_data(step: ObservationStep | None) -> bool:
    return step is not None and step.z.size > 0


# =====================================================
# Optimal interpolation / 3DVar
# =====================================================

def optimal_interpolation(
    u_b: np.ndarray, C_b: np.ndarray, H: np.ndarray, R: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """u_b + K (z - H u_b) with K = C_b H^T (H C_b H^T + R)^{-1}."""
    u_b = np.asarray(u_b, dtype=float)
    C_b = np.asarray(C_b, dtype=float)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if C_b.shape != (u_b.size, u_b.size) or H.shape != (z.size, u_b.size) or R.shape != (z.size, z.size):
        raise InvalidArgumentError(
            f"inconsistent shapes: u_b {u_b.shape}, C_b {C_b.shape}, H {H.shape}, R {R.shape}, z {z.shape}"
        )
    if z.size == 0:
        return u_b.copy()

    factor = _factor(H @ C_b @ H.T + R, "innovation covariance H C_b H^T + R")
    return u_b + C_b @ H.T @ linalg.cho_solve(factor, z - H @ u_b)


def var3d_objective(
    u: np.ndarray, u_b: np.ndarray, C_b: np.ndarray, H: np.ndarray, R: np.ndarray, z: np.ndarray
) -> tuple[float, np.ndarray]:
    """J(u) = 1/2 |u - u_b|^2_{C_b^-1} + 1/2 |z - H u|^2_{R^-1} and its gradient."""
    u = np.asarray(u, dtype=float)
    H = np.atleast_2d(H)
    d_b = linalg.cho_solve(_factor(np.asarray(C_b, dtype=float), "C_b"), u - u_b)
    innovation = np.atleast_1d(z) - H @ u
    d_o = linalg.cho_solve(_factor(np.atleast_2d(R).astype(float), "R"), innovation)
    value = 0.5 * float((u - u_b) @ d_b) + 0.5 * float(innovation @ d_o)
    return value, d_b - H.T @ d_o


def background_covariance(s_nodes: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Squared-exponential C_b on the spatial nodes, jittered until factorizable."""
    K = cov_matrix(kernel, s_nodes, s_nodes)
    _, jitter = cholesky_with_jitter(K, scale=kernel.variance)
    return K + jitter * np.eye(K.shape[0])


# =====================================================
# Kalman filter and smoother
# =====================================================

@dataclass(frozen=True, eq=False)
class KalmanResult:
    filtered_means: np.ndarray
    filtered_covs: np.ndarray
    predicted_means: np.ndarray
    predicted_covs: np.ndarray
    transitions: np.ndarray = field(repr=False)
    log_likelihood: float = 0.0


@dataclass(frozen=True, eq=False)
class SmootherResult:
    means: np.ndarray
    covs: np.ndarray


def _stabilize(P: np.ndarray, time_index: int) -> np.ndarray:
    """Symmetrize and add the smallest jitter that makes P factorizable."""
    P = 0.5 * (P + P.T)
    scale = max(float(np.mean(np.diag(P))), 1e-12)
    _, jitter = cholesky_with_jitter(P, scale=scale, time_index=time_index)
    return P + jitter * np.eye(P.shape[0]) if jitter else P


def _transition_list(M: np.ndarray | Sequence[np.ndarray], T: int, n: int) -> np.ndarray:
    mats = np.asarray(M, dtype=float)
    if mats.ndim == 2:
        mats = np.repeat(mats[None], max(T - 1, 0), axis=0)
    if mats.shape != (max(T - 1, 0), n, n):
        raise InvalidArgumentError(f"expected {T - 1} transition matrices of shape ({n}, {n}), got {mats.shape}")
    return mats


def kalman_filter(
    steps: Sequence[ObservationStep | None],
    M: np.ndarray | Sequence[np.ndarray],
    Q: np.ndarray,
    m0: np.ndarray,
    P0: np.ndarray,
    offsets: Sequence[np.ndarray] | None = None,
) -> KalmanResult:
    """
    Predict/update recursion; (m0, P0) is the prior at time 0.

    ``M`` is one matrix or one per transition k -> k+1; ``offsets`` adds c_k
    to the predicted mean (affine dynamics).
    """
    T = len(steps)
    m = np.asarray(m0, dtype=float).copy()
    n = m.size
    P = np.asarray(P0, dtype=float)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if P.shape != (n, n) or Q.shape != (n, n):
        raise InvalidArgumentError("P0 and Q must be n x n")
    mats = _transition_list(M, T, n)
    if offsets is not None and len(offsets) != T - 1:
        raise InvalidArgumentError(f"expected {T - 1} offsets, got {len(offsets)}")

    fm, fP = np.empty((T, n)), np.empty((T, n, n))
    pm, pP = np.empty((T, n)), np.empty((T, n, n))
    log_lik = 0.0
    for k, step in enumerate(steps):
        if k > 0:
            A = mats[k - 1]
            m = A @ m
            if offsets is not None:
                m = m + np.asarray(offsets[k - 1], dtype=float)
            P = _stabilize(A @ P @ A.T + Q, k)
        pm[k], pP[k] = m, P

        if _has_data(step):
            H, R = step.H, step.R
            if H.shape[1] != n:
                raise InvalidArgumentError(f"H at time {k} has {H.shape[1]} columns, state has {n}")
            S = H @ P @ H.T + R
            factor = _factor(S, "innovation covariance", k)
            innovation = step.z - H @ m
            gain = linalg.cho_solve(factor, H @ P).T
            m = m + gain @ innovation
            I_KH = np.eye(n) - gain @ H
            P = _stabilize(I_KH @ P @ I_KH.T + gain @ R @ gain.T, k)
            log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
            log_lik += -0.5 * (
                innovation @ linalg.cho_solve(factor, innovation) + log_det + innovation.size * np.log(2 * np.pi)
            )
        fm[k], fP[k] = m, P

    return KalmanResult(fm, fP, pm, pP, mats, float(log_lik))


def kalman_smoother(result: KalmanResult) -> SmootherResult:
    """Rauch-Tung-Striebel backward pass over a filter result."""
    fm, fP = result.filtered_means, result.filtered_covs
    T = fm.shape[0]
    means, covs = fm.copy(), fP.copy()
    for k in range(T - 2, -1, -1):
        A = result.transitions[k]
        factor = _factor(result.predicted_covs[k + 1], "predicted covariance", k + 1)
        gain = linalg.cho_solve(factor, A @ fP[k]).T
        means[k] = fm[k] + gain @ (means[k + 1] - result.predicted_means[k + 1])
        covs[k] = fP[k] + gain @ (covs[k + 1] - result.predicted_covs[k + 1]) @ gain.T
        covs[k] = 0.5 * (covs[k] + covs[k].T)
    return SmootherResult(means, covs)


def linearize_model(model: Model, states: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians A_k and offsets c_k with M(u) ~ A_k u + c_k around each state."""
    mats, offsets = [], []
    for u in states:
        u = np.asarray(u, dtype=float)
        A = ad.jacobian(model, u)
        mats.append(A)
        offsets.append(np.asarray(ad.value_of(model(u))) - A @ u)
    return np.array(mats), np.array(offsets)


# =====================================================
# 4DVar
# =====================================================

@dataclass(frozen=True, eq=False)
class Var4DResult:
    u0: np.ndarray
    trajectory: np.ndarray
    eta: np.ndarray | None
    objective_history: list[float]
    final_objective: float
    gradient_norm: float
    n_iterations: int
    restarts: int
    converged: bool
    message: str


def _trajectory(model: Model, u0: np.ndarray, T: int, eta: np.ndarray | None) -> np.ndarray:
    states = [np.asarray(u0, dtype=float)]
    for k in range(1, T):
        u = np.asarray(ad.value_of(model(states[-1])), dtype=float)
        if eta is not None:
            u = u + eta[k - 1]
        states.append(u)
    return np.array(states)


def var4d(
    u0_init: np.ndarray,
    window: Sequence[ObservationStep | None],
    config: AssimConfig,
    model: Model,
    mode: Mode = "strong",
) -> Var4DResult:
    """
    Minimize the 4DVar objective with L-BFGS-B and tape gradients through ``model``.

    strong: J(u0) = J_b + sum_k J_o,k
    weak:   J(u0, eta_1..eta_{T-1}) = J_b + sum_k J_o,k + sum_k 1/2 |eta_k - mu_eta|^2_{Q^-1}
    """
    if mode not in ("strong", "weak"):
        raise InvalidArgumentError(f"unknown 4DVar mode {mode!r}")
    n = config.state_dim
    T = len(window)
    if T == 0:
        raise InvalidArgumentError("assimilation window is empty")
    u0_init = np.asarray(u0_init, dtype=float)
    if u0_init.shape != (n,):
        raise InvalidArgumentError(f"u0_init has shape {u0_init.shape}, expected ({n},)")

    weak = mode == "weak"
    mu_eta = np.zeros(n) if config.mu_eta is None else config.mu_eta
    if weak and config.Q is None:
        raise InvalidArgumentError("weak-constraint 4DVar needs the model-error covariance Q")
    n_eta = T - 1 if weak else 0

    if not any(_has_data(step) for step in window):
        eta = np.tile(mu_eta, (n_eta, 1)) if weak else None
        logger.info("No observations in the window; returning the background state")
        return Var4DResult(
            u0=config.u_b.copy(),
            trajectory=_trajectory(model, config.u_b, T, eta),
            eta=eta,
            objective_history=[0.0],
            final_objective=0.0,
            gradient_norm=0.0,
            n_iterations=0,
            restarts=0,
            converged=True,
            message="background only",
        )

    B_inv = _precision(config.C_b, "C_b")
    R_inv = [_precision(s.R, f"R at time {k}") if _has_data(s) else None for k, s in enumerate(window)]
    Q_inv = _precision(config.Q, "Q") if weak else None

    def objective(x: Any) -> Any:
        u0 = x[:n]
        J = 0.5 * ad.quad_form(u0 - config.u_b, B_inv)
        u = u0
        for k, step in enumerate(window):
            if k > 0:
                u = model(u)
                if weak:
                    eta_k = x[n * k:n * (k + 1)]
                    u = u + eta_k
                    J = J + 0.5 * ad.quad_form(eta_k - mu_eta, Q_inv)
            if R_inv[k] is not None:
                J = J + 0.5 * ad.quad_form(step.z - step.H @ u, R_inv[k])
        return J

    x = np.concatenate([u0_init, np.tile(mu_eta, n_eta)]) if weak else u0_init.copy()
    history: list[float] = []

    def callback(intermediate_result: optimize.OptimizeResult) -> None:
        history.append(float(intermediate_result.fun))

    def fun(v: np.ndarray) -> tuple[float, np.ndarray]:
        return ad.value_and_grad(objective, v)

    value0, grad0 = fun(x)
    history.append(value0)
    g_scale = float(np.max(np.abs(grad0)))

    n_iter = 0
    restarts = 0
    while True:
        result = optimize.minimize(
            fun,
            x,
            jac=True,
            method="L-BFGS-B",
            callback=callback,
            options={"maxiter": max(config.max_iter - n_iter, 1), "gtol": config.gtol, "ftol": 1e-15},
        )
        x = result.x
        n_iter += int(result.nit)
        g_norm = float(np.max(np.abs(result.jac)))
        stationary = g_norm <= max(config.gtol, 1e-10 * g_scale)
        line_search_failed = not result.success and "ABNORMAL" in str(result.message).upper()
        if not line_search_failed or stationary:
            break
        if restarts >= config.max_restarts:
            raise OptimizationError(
                f"4DVar line search failed after {restarts} restarts",
                details={"gradient_norm": g_norm, "objective": float(result.fun), "iterations": n_iter},
            )
        restarts += 1
        logger.warning("4DVar line search failed (|g|=%.3e); restarting L-BFGS-B (%d)", g_norm, restarts)

    eta = x[n:].reshape(n_eta, n) if weak else None
    converged = g_norm <= config.gtol or stationary
    logger.info(
        "4DVar (%s) finished: J=%.6e, |g|=%.3e, %d iterations", mode, result.fun, g_norm, n_iter
    )
    return Var4DResult(
        u0=x[:n].copy(),
        trajectory=_trajectory(model, x[:n], T, eta),
        eta=None if eta is None else eta.copy(),
        objective_history=history,
        final_objective=float(result.fun),
        gradient_norm=g_norm,
        n_iterations=n_iter,
        restarts=restarts,
        converged=bool(converged),
        message=str(result.message),
    )
