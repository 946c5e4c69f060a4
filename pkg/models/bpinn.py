"""
Bayesian physics-informed model of a dynamic spatio-temporal process.

    z_t = H_t (X_t beta + u_NN(., t) + nu_t) + eps_t

u_NN is a dense tanh network constrained by the viscous Burgers residual, the
boundary values and the initial condition at collocation points; nu_t is a
per-time squared-exponential GP integrated out of the likelihood; eps_t is
white noise with standard deviation sigma_d.

The sampled vector lives in unconstrained space:

    [theta_W (n_w) | beta (p) | log lambda | x_sigma_d | x_sigma2_nu | x_ell_nu]

where bounded parameters map through v = lo + (hi - lo) * sigmoid(x).  With
``latent_process = False`` theta_W and log lambda are absent and u_NN == 0.
"""

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from scipy import optimize

from core.exceptions import InvalidArgumentError, NumericalError, OptimizationError
from models.grid import Field, SpaceTimeGrid
from numerics import autodiff as ad
from numerics.random_fields import gp_condition
from schema.kernel import KernelSpec
from schema.model import CollocationSettings, ModelSettings, PinnLossWeights
from schema.network import NeuralNetSpec
from schema.solver import gaussian_bump

logger = logging.getLogger(__name__)

SCALAR_NAMES = ("beta1", "beta2", "lambda", "sigma_d", "sigma2_nu", "ell_nu")
BOUNDED = ("sigma_d", "sigma2_nu", "ell_nu")


# =====================================================
# Network
# =====================================================

def _column(x: Any) -> Any:
    if isinstance(x, ad.DualSecond):
        return x[:, None]
    return np.atleast_1d(np.asarray(x, dtype=float))[:, None]


def nn_forward(spec: NeuralNetSpec, theta_W: Any, s: Any, t: Any) -> Any:
    """
    u_NN(s, t; theta_W) at one point or at arrays of points.

    Inputs are normalized as s / s_scale and 2 t / t_scale - 1.  ``s`` or ``t``
    may be dual numbers and ``theta_W`` may be a tape variable.
    """
    theta_value = ad.value_of(theta_W)
    if theta_value.shape != (spec.n_params,):
        raise InvalidArgumentError(
            f"theta_W has shape {theta_value.shape}, network expects ({spec.n_params},)"
        )
    scalar = ad.value_of(s).ndim == 0 and ad.value_of(t).ndim == 0

    s_in = _column(s) * (1.0 / spec.s_scale)
    t_in = _column(t) * (2.0 / spec.t_scale) - 1.0

    layers = spec.layout()
    h: Any = None
    for i, layer in enumerate(layers):
        W = ad.reshape(theta_W[layer.weight], layer.weight_shape)
        b = theta_W[layer.bias]
        if i == 0:
            pre = s_in * W[0] + t_in * W[1] + b
        else:
            pre = h @ W + b
        h = ad.tanh(pre) if i < len(layers) - 1 else pre

    out = h[:, 0]
    return out[0] if scalar else out


def pde_residual(spec: NeuralNetSpec, theta_W: Any, lam: Any, s: Any, t: Any) -> Any:
    """r = du/dt + u du/ds - lam d2u/ds2 of the network at points (s, t)."""
    if np.any(ad.value_of(lam) < 0):
        raise InvalidArgumentError("lambda must be non-negative")
    s_arr, t_arr = np.broadcast_arrays(
        np.atleast_1d(np.asarray(s, dtype=float)), np.atleast_1d(np.asarray(t, dtype=float))
    )

    def net(s_: Any, t_: Any, params: Any) -> Any:
        return nn_forward(spec, params, s_, t_)

    u, u_t, u_s, u_ss = ad.input_derivs(net, s_arr.copy(), t_arr.copy(), theta_W)
    return u_t + u * u_s - lam * u_ss


# =====================================================
# Parameters
# =====================================================

def _to_bounded(x: Any, bounds: tuple[float, float]) -> tuple[Any, Any]:
    """Value lo + (hi - lo) sigmoid(x) and log|dv/dx|."""
    lo, hi = bounds
    value = lo + (hi - lo) * ad.sigmoid(x)
    log_jac = math.log(hi - lo) - ad.softplus(-x) - ad.softplus(x)
    return value, log_jac


def _from_bounded(value: float, bounds: tuple[float, float], name: str) -> float:
    lo, hi = bounds
    p = (value - lo) / (hi - lo)
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError(f"{name}={value} lies outside its bounds {bounds}")
    return math.log(p) - math.log1p(-p)


@dataclass(frozen=True)
class ParameterLayout:
    """Offsets of each block in the unconstrained vector."""

    n_weights: int
    latent: bool
    n_beta: int = 2

    @classmethod
    def from_settings(cls, settings: ModelSettings) -> "ParameterLayout":
        latent = settings.latent_process
        return cls(n_weights=settings.network.n_params if latent else 0, latent=latent)

    @property
    def weights(self) -> slice:
        return slice(0, self.n_weights)

    @property
    def beta(self) -> slice:
        return slice(self.n_weights, self.n_weights + self.n_beta)

    @property
    def log_lambda(self) -> int | None:
        return self.beta.stop if self.latent else None

    def index(self, name: str) -> int:
        """Position of a bounded parameter."""
        start = self.beta.stop + (1 if self.latent else 0)
        return start + BOUNDED.index(name)

    @property
    def dim(self) -> int:
        return self.index(BOUNDED[-1]) + 1

    @property
    def scalar_names(self) -> list[str]:
        return [n for n in SCALAR_NAMES if self.latent or n != "lambda"]

    @property
    def weight_names(self) -> list[str]:
        width = max(3, len(str(self.n_weights - 1)))
        return [f"w{i:0{width}d}" for i in range(self.n_weights)]


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Constrained parameters of one posterior draw."""

    theta_W: np.ndarray
    beta: np.ndarray
    lam: float | None
    sigma_d: float
    sigma2_nu: float
    ell_nu: float

    def scalars(self) -> dict[str, float]:
        values = {
            "beta1": float(self.beta[0]),
            "beta2": float(self.beta[1]),
            "lambda": self.lam,
            "sigma_d": self.sigma_d,
            "sigma2_nu": self.sigma2_nu,
            "ell_nu": self.ell_nu,
        }
        return {k: float(v) for k, v in values.items() if v is not None}

    def as_row(self, layout: ParameterLayout, include_weights: bool = True) -> dict[str, float]:
        row = self.scalars()
        if include_weights:
            row.update(zip(layout.weight_names, map(float, self.theta_W), strict=True))
        return row

    @classmethod
    def from_row(cls, row: Mapping[str, float], layout: ParameterLayout) -> "ParameterVector":
        missing = [n for n in layout.scalar_names + layout.weight_names if n not in row]
        if missing:
            raise InvalidArgumentError(f"draw is missing columns {missing[:5]}")
        return cls(
            theta_W=np.array([row[n] for n in layout.weight_names], dtype=float),
            beta=np.array([row["beta1"], row["beta2"]], dtype=float),
            lam=float(row["lambda"]) if layout.latent else None,
            sigma_d=float(row["sigma_d"]),
            sigma2_nu=float(row["sigma2_nu"]),
            ell_nu=float(row["ell_nu"]),
        )


# =====================================================
# Data
# =====================================================

@dataclass(frozen=True, eq=False)
class CollocationSet:
    """Residual, boundary and initial-condition pseudo-observation locations (s, t)."""

    interior: np.ndarray
    boundary: np.ndarray
    boundary_values: np.ndarray
    initial: np.ndarray
    initial_values: np.ndarray
    sigma2_r: float
    sigma2_bc: float
    sigma2_ic: float
    domain: tuple[float, float] = (-math.pi, math.pi)
    t_start: float = 0.0

    def __post_init__(self) -> None:
        if min(self.sigma2_r, self.sigma2_bc, self.sigma2_ic) <= 0:
            raise InvalidArgumentError("collocation variances must be positive")
        for name in ("interior", "boundary", "initial"):
            pts = np.asarray(getattr(self, name), dtype=float).reshape(-1, 2)
            object.__setattr__(self, name, pts)
        lo, hi = self.domain
        s, t = self.interior[:, 0], self.interior[:, 1]
        if np.any(s <= lo) or np.any(s >= hi) or np.any(t <= self.t_start):
            raise InvalidArgumentError("interior collocation points must lie strictly inside the domain")
        if np.shape(self.boundary_values) != (len(self.boundary),):
            raise InvalidArgumentError("one boundary value per boundary point is required")
        if np.shape(self.initial_values) != (len(self.initial),):
            raise InvalidArgumentError("one initial value per initial point is required")

    @classmethod
    def from_grid(
        cls,
        grid: SpaceTimeGrid,
        settings: CollocationSettings | None = None,
        ic: Callable[[np.ndarray], np.ndarray] = gaussian_bump,
        bc: tuple[float, float] = (0.0, 0.0),
    ) -> "CollocationSet":
        """Interior grid nodes, both endpoints at every time, every node at t = 0."""
        settings = settings or CollocationSettings()
        s, t = grid.s_nodes, grid.t_nodes
        ss, tt = np.meshgrid(s[1:-1], t[1:], indexing="xy")
        interior = np.column_stack([ss.ravel(), tt.ravel()])

        boundary = np.concatenate(
            [np.column_stack([np.full(grid.T, s[0]), t]), np.column_stack([np.full(grid.T, s[-1]), t])]
        )
        boundary_values = np.concatenate([np.full(grid.T, bc[0]), np.full(grid.T, bc[1])])
        initial = np.column_stack([s, np.full(grid.n, t[0])])

        return cls(
            interior=interior,
            boundary=boundary,
            boundary_values=boundary_values,
            initial=initial,
            initial_values=np.asarray(ic(s), dtype=float),
            sigma2_r=settings.sigma2_r,
            sigma2_bc=settings.sigma2_bc,
            sigma2_ic=settings.sigma2_ic,
            domain=(float(s[0]), float(s[-1])),
            t_start=float(t[0]),
        )


@dataclass(frozen=True, eq=False)
class ObservationGroup:
    """Times sharing one set of observed columns."""

    times: np.ndarray
    columns: np.ndarray
    positions: np.ndarray
    sq_dist: np.ndarray


@dataclass(frozen=True, eq=False)
class ModelData:
    """Observations, covariates (T, n, p) and collocation design."""

    observations: Field
    covariates: np.ndarray
    collocation: CollocationSet

    def __post_init__(self) -> None:
        X = np.asarray(self.covariates, dtype=float)
        if X.ndim != 3 or X.shape[:2] != self.grid.shape:
            raise InvalidArgumentError(
                f"covariates must have shape (T, n, p) = {self.grid.shape + ('p',)}, got {X.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise InvalidArgumentError("covariates must be finite")
        object.__setattr__(self, "covariates", X)

    @property
    def grid(self) -> SpaceTimeGrid:
        return self.observations.grid

    @cached_property
    def observed_flat(self) -> np.ndarray:
        return np.flatnonzero(self.observations.mask.ravel())

    @property
    def n_observed(self) -> int:
        return int(self.observed_flat.size)

    @cached_property
    def observed_points(self) -> np.ndarray:
        return self.grid.points()[self.observed_flat]

    @cached_property
    def observed_values(self) -> np.ndarray:
        return self.observations.values.ravel()[self.observed_flat]

    @cached_property
    def design(self) -> np.ndarray:
        """Covariate rows at observed entries, shape (n_observed, p)."""
        p = self.covariates.shape[-1]
        return self.covariates.reshape(-1, p)[self.observed_flat]

    @cached_property
    def value_points(self) -> np.ndarray:
        """Observed, boundary and initial points stacked for one network pass."""
        c = self.collocation
        return np.concatenate([self.observed_points.reshape(-1, 2), c.boundary, c.initial])

    @cached_property
    def groups(self) -> list[ObservationGroup]:
        grid = self.grid
        lookup = np.full(grid.T * grid.n, -1, dtype=np.intp)
        lookup[self.observed_flat] = np.arange(self.n_observed)

        by_columns: dict[tuple[int, ...], list[int]] = {}
        for k, row in enumerate(self.observations.mask):
            cols = tuple(np.flatnonzero(row).tolist())
            if cols:
                by_columns.setdefault(cols, []).append(k)

        groups = []
        for cols, times in by_columns.items():
            columns = np.asarray(cols, dtype=np.intp)
            times_arr = np.asarray(times, dtype=np.intp)
            s = grid.s_nodes[columns]
            groups.append(
                ObservationGroup(
                    times=times_arr,
                    columns=columns,
                    positions=lookup[times_arr[:, None] * grid.n + columns[None, :]],
                    sq_dist=np.subtract.outer(s, s) ** 2,
                )
            )
        return groups

    @classmethod
    def build(
        cls,
        observations: Field,
        covariates: np.ndarray,
        settings: CollocationSettings | None = None,
        ic: Callable[[np.ndarray], np.ndarray] = gaussian_bump,
    ) -> "ModelData":
        return cls(observations, covariates, CollocationSet.from_grid(observations.grid, settings, ic))


# =====================================================
# Log density
# =====================================================

def _sum_of_squares(x: Any) -> Any:
    return ad.sum_(ad.square(x))


class BPINNModel:
    """Unnormalized log posterior in unconstrained coordinates."""

    def __init__(self, settings: ModelSettings, data: ModelData):
        self.settings = settings
        self.data = data
        self.spec = settings.network
        self.priors = settings.priors
        self.layout = ParameterLayout.from_settings(settings)
        if data.covariates.shape[-1] != self.layout.n_beta:
            raise InvalidArgumentError(
                f"model expects {self.layout.n_beta} covariates, got {data.covariates.shape[-1]}"
            )

    @property
    def dim(self) -> int:
        return self.layout.dim

    def _bounds(self, name: str) -> tuple[float, float]:
        return getattr(self.priors, f"{name}_bounds")

    def _unpack(self, x: Any) -> tuple[dict[str, Any], Any]:
        L = self.layout
        parts: dict[str, Any] = {"beta": x[L.beta]}
        log_jac: Any = 0.0
        if L.latent:
            parts["theta"] = x[L.weights]
            log_lam = x[L.log_lambda]
            parts["lambda"] = ad.exp(log_lam)
            log_jac = log_jac + log_lam
        for name in BOUNDED:
            parts[name], jac = _to_bounded(x[L.index(name)], self._bounds(name))
            log_jac = log_jac + jac
        return parts, log_jac

    def _log_prior(self, p: dict[str, Any]) -> Any:
        pr = self.priors
        total = -_sum_of_squares(p["beta"] - pr.mu_beta) / (2.0 * pr.c_beta)
        if self.layout.latent:
            total = total - _sum_of_squares(p["theta"]) / (2.0 * pr.c_w)
            total = total - ad.square(p["lambda"] - pr.mu_lambda) / (2.0 * pr.sigma2_lambda)
        # truncation constants are dropped
        total = total - ad.log(1.0 + ad.square((p["sigma_d"] - pr.mu_d) / pr.gamma_d))
        total = total - ad.log(1.0 + ad.square((p["sigma2_nu"] - pr.mu_nu) / pr.gamma_nu))
        total = total - ad.square(p["ell_nu"] - pr.mu_ell) / (2.0 * pr.sigma2_ell)
        return total

    def _log_likelihood(self, p: dict[str, Any], u_obs: Any) -> Any:
        data = self.data
        if data.n_observed == 0:
            return 0.0
        residual = data.observed_values - data.design @ p["beta"]
        if u_obs is not None:
            residual = residual - u_obs

        ell2 = ad.square(p["ell_nu"])
        noise = ad.square(p["sigma_d"])
        total: Any = 0.0
        for group in data.groups:
            m = group.columns.size
            K = p["sigma2_nu"] * ad.exp((-0.5 * group.sq_dist) / ell2)
            cov = K + noise * np.eye(m)
            R = residual[group.positions]
            total = total + ad.gaussian_logpdf(R, cov, time_index=int(group.times[0]))
        return total

    def terms(self, x: Any) -> dict[str, Any]:
        """Additive components of the log density at unconstrained ``x``."""
        x_value = ad.value_of(x)
        if x_value.shape != (self.dim,):
            raise InvalidArgumentError(f"parameter vector has shape {x_value.shape}, expected ({self.dim},)")

        p, log_jac = self._unpack(x)
        out = {"prior": self._log_prior(p), "jacobian": log_jac}

        data = self.data
        coll = data.collocation
        if not self.layout.latent:
            out.update(data=self._log_likelihood(p, None), residual=0.0, bc=0.0, ic=0.0)
            return out

        pts = data.value_points
        u = nn_forward(self.spec, p["theta"], pts[:, 0], pts[:, 1])
        n_obs, n_bc = data.n_observed, len(coll.boundary)
        u_obs = u[:n_obs]
        u_bc = u[n_obs:n_obs + n_bc]
        u_ic = u[n_obs + n_bc:]

        out["data"] = self._log_likelihood(p, u_obs)
        if len(coll.interior):
            r = pde_residual(self.spec, p["theta"], p["lambda"], coll.interior[:, 0], coll.interior[:, 1])
            out["residual"] = -_sum_of_squares(r) / (2.0 * coll.sigma2_r)
        else:
            out["residual"] = 0.0
        out["bc"] = -_sum_of_squares(u_bc - coll.boundary_values) / (2.0 * coll.sigma2_bc)
        out["ic"] = -_sum_of_squares(u_ic - coll.initial_values) / (2.0 * coll.sigma2_ic)
        return out

    def log_density(self, x: Any) -> Any:
        total: Any = 0.0
        for term in self.terms(x).values():
            total = total + term
        return total

    def logp(self, x: np.ndarray) -> float:
        return float(ad.value_of(self.log_density(np.asarray(x, dtype=float))))

    def logp_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        return ad.value_and_grad(self.log_density, x)

    # -------------------------
    # Transforms
    # -------------------------
    def constrain(self, x: np.ndarray) -> ParameterVector:
        x = np.asarray(x, dtype=float)
        p, _ = self._unpack(x)
        return ParameterVector(
            theta_W=np.array(p.get("theta", np.zeros(0)), dtype=float),
            beta=np.array(p["beta"], dtype=float),
            lam=float(p["lambda"]) if self.layout.latent else None,
            sigma_d=float(p["sigma_d"]),
            sigma2_nu=float(p["sigma2_nu"]),
            ell_nu=float(p["ell_nu"]),
        )

    def unconstrain(self, params: ParameterVector) -> np.ndarray:
        L = self.layout
        x = np.empty(self.dim)
        if np.shape(params.theta_W) != (L.n_weights,):
            raise InvalidArgumentError(f"theta_W must have {L.n_weights} entries")
        x[L.weights] = params.theta_W
        x[L.beta] = params.beta
        if L.latent:
            if params.lam is None or params.lam <= 0:
                raise InvalidArgumentError(f"lambda must be positive, got {params.lam}")
            x[L.log_lambda] = math.log(params.lam)
        for name in BOUNDED:
            x[L.index(name)] = _from_bounded(getattr(params, name), self._bounds(name), name)
        return x

    def initial_point(
        self, rng: np.random.Generator, warm_start: "PinnFit | None" = None
    ) -> np.ndarray:
        """Prior-scaled weights, beta = 0, lambda = initial_lambda, bounded parameters at midpoints."""
        L = self.layout
        s = self.settings
        x = np.zeros(self.dim)
        if L.latent:
            x[L.weights] = s.init_weight_scale * math.sqrt(s.priors.c_w) * rng.standard_normal(L.n_weights)
            x[L.log_lambda] = math.log(s.initial_lambda)
            if warm_start is not None:
                x[L.weights] = warm_start.theta_W
                x[L.beta] = warm_start.beta
                x[L.log_lambda] = math.log(max(warm_start.lam, 1e-8))
        return x


def log_joint(params: ParameterVector, data: ModelData, settings: ModelSettings) -> float:
    """Unnormalized log posterior of constrained parameters, Jacobian terms included."""
    model = BPINNModel(settings, data)
    return model.logp(model.unconstrain(params))


# =====================================================
# Prediction
# =====================================================

@dataclass(frozen=True, eq=False)
class Prediction:
    """Fields implied by one posterior draw, each of shape (T, n)."""

    mu: np.ndarray
    u_nn: np.ndarray
    nu_mean: np.ndarray
    nu_cov: np.ndarray = field(repr=False)

    @property
    def nu_var(self) -> np.ndarray:
        return np.clip(np.diagonal(self.nu_cov, axis1=1, axis2=2), 0.0, None)

    @property
    def u_total(self) -> np.ndarray:
        return self.mu + self.u_nn + self.nu_mean


def discrepancy_posterior(
    kernel: KernelSpec,
    s_nodes: np.ndarray,
    columns: np.ndarray,
    residual: np.ndarray,
    noise_var: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior of nu_t on every spatial node given residuals at observed columns."""
    columns = np.asarray(columns, dtype=np.intp)
    return gp_condition(kernel, s_nodes[columns], residual, noise_var, s_nodes)


def predict(
    params: ParameterVector,
    observations: Field,
    covariates: np.ndarray,
    spec: NeuralNetSpec,
    noise_var: float | None = None,
) -> Prediction:
    """u_NN on the grid and the per-time discrepancy posterior; ``noise_var`` overrides sigma_d^2."""
    grid = observations.grid
    X = np.asarray(covariates, dtype=float)
    if X.shape[:2] != grid.shape:
        raise InvalidArgumentError("covariates do not match the observation grid")
    mu = X @ params.beta

    if params.theta_W.size:
        pts = grid.points()
        u_nn = np.asarray(nn_forward(spec, params.theta_W, pts[:, 0], pts[:, 1])).reshape(grid.shape)
    else:
        u_nn = np.zeros(grid.shape)

    kernel = KernelSpec.squared_exponential(params.sigma2_nu, params.ell_nu)
    noise = params.sigma_d**2 if noise_var is None else noise_var
    nu_mean = np.empty(grid.shape)
    nu_cov = np.empty((grid.T, grid.n, grid.n))
    for k in range(grid.T):
        cols = np.flatnonzero(observations.mask[k])
        residual = observations.values[k, cols] - mu[k, cols] - u_nn[k, cols]
        nu_mean[k], nu_cov[k] = discrepancy_posterior(kernel, grid.s_nodes, cols, residual, noise)
    return Prediction(mu=mu, u_nn=u_nn, nu_mean=nu_mean, nu_cov=nu_cov)


# =====================================================
# Deterministic PINN
# =====================================================

def _mean_square(x: Any, n: int) -> Any:
    return _sum_of_squares(x) / n if n else 0.0


def pinn_loss(
    spec: NeuralNetSpec,
    theta_W: Any,
    lam: Any,
    data: ModelData,
    weights: PinnLossWeights | None = None,
    beta: Any = None,
) -> Any:
    """a_D J_D + a_P J_P + a_BC J_BC + a_IC J_IC, each J a mean squared error."""
    weights = weights or PinnLossWeights()
    coll = data.collocation
    if beta is None:
        beta = np.zeros(data.covariates.shape[-1])

    pts = data.value_points
    u = nn_forward(spec, theta_W, pts[:, 0], pts[:, 1])
    n_obs, n_bc, n_ic = data.n_observed, len(coll.boundary), len(coll.initial)

    misfit = data.observed_values - data.design @ beta - u[:n_obs]
    loss = weights.a_data * _mean_square(misfit, n_obs)
    if len(coll.interior):
        r = pde_residual(spec, theta_W, lam, coll.interior[:, 0], coll.interior[:, 1])
        loss = loss + weights.a_residual * _mean_square(r, len(coll.interior))
    loss = loss + weights.a_bc * _mean_square(u[n_obs:n_obs + n_bc] - coll.boundary_values, n_bc)
    loss = loss + weights.a_ic * _mean_square(u[n_obs + n_bc:] - coll.initial_values, n_ic)
    return loss


@dataclass(frozen=True, eq=False)
class PinnFit:
    theta_W: np.ndarray
    beta: np.ndarray
    lam: float
    loss_history: list[float]
    converged: bool
    message: str


def fit_pinn(
    spec: NeuralNetSpec,
    data: ModelData,
    weights: PinnLossWeights | None = None,
    init: Sequence[float] | None = None,
    max_iter: int = 500,
    seed: int = 0,
    initial_lambda: float = 0.5,
) -> PinnFit:
    """
    Minimize ``pinn_loss`` over (theta_W, beta, log lambda) with L-BFGS-B.

    ``init`` is a flat vector in that order; by default weights start from
    0.1 N(0, I), beta at zero and lambda at ``initial_lambda``.
    """
    n_w = spec.n_params
    p = data.covariates.shape[-1]
    if init is None:
        rng = np.random.default_rng(seed)
        x0 = np.concatenate([0.1 * rng.standard_normal(n_w), np.zeros(p), [math.log(initial_lambda)]])
    else:
        x0 = np.array(init, dtype=float)
        if x0.shape != (n_w + p + 1,):
            raise InvalidArgumentError(f"init must have {n_w + p + 1} entries, got {x0.shape}")

    def objective(x: Any) -> Any:
        return pinn_loss(spec, x[:n_w], ad.exp(x[-1]), data, weights, beta=x[n_w:n_w + p])

    history: list[float] = []

    def callback(intermediate_result: optimize.OptimizeResult) -> None:
        history.append(float(intermediate_result.fun))

    try:
        result = optimize.minimize(
            lambda x: ad.value_and_grad(objective, x),
            x0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iter},
            callback=callback,
        )
    except NumericalError as exc:
        raise OptimizationError(f"PINN training failed: {exc.message}") from exc

    logger.info(
        "PINN fit finished after %d iterations (loss=%.4e, %s)", result.nit, result.fun, result.message
    )
    x = result.x
    return PinnFit(
        theta_W=x[:n_w].copy(),
        beta=x[n_w:n_w + p].copy(),
        lam=float(math.exp(x[-1])),
        loss_history=history,
        converged=bool(result.success),
        message=str(result.message),
    )
