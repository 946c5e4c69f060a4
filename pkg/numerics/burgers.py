"""
Viscous Burgers' equation u_t + u u_s = lam u_ss with Dirichlet data.

Two discretizations:

* spectral: Fourier pseudo-spectral on the odd periodic extension of period
  2 (s_max - s_min), 2/3-rule dealiasing, integrating-factor RK4 in time.  The
  odd extension enforces zero boundary values exactly.
* finite difference: upwind advection, central diffusion, classic RK4.  Its
  state lives on the n_internal nodes of the physical interval; ``step`` works
  on plain arrays and on tape variables.

``cole_hopf_reference`` evaluates the exact solution through the Cole-Hopf
transform by adaptive quadrature.
"""

import logging
import math
from collections.abc import Callable
from functools import lru_cache
from typing import Any, Literal

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from core.exceptions import InstabilityError, InvalidArgumentError, QuadratureError
from models.grid import Field, SpaceTimeGrid
from numerics import autodiff as ad
from schema.solver import RK4_IMAGINARY_LIMIT, RK4_REAL_LIMIT, BurgersConfig

logger = logging.getLogger(__name__)

Scheme = Literal["spectral", "finite_difference"]

ADVECTIVE_BOUND = f"dt*max|u|*k_max <= {RK4_IMAGINARY_LIMIT}"
DIFFUSIVE_BOUND = f"4*lambda*dt/ds^2 <= {RK4_REAL_LIMIT}"


def _substeps(interval: float, dt_max: float) -> int:
    return max(1, math.ceil(interval / dt_max - 1e-9))


def _check_domain(cfg: BurgersConfig, grid: SpaceTimeGrid) -> None:
    if not (
        math.isclose(grid.s_nodes[0], cfg.s_min, abs_tol=1e-12)
        and math.isclose(grid.s_nodes[-1], cfg.s_max, abs_tol=1e-12)
    ):
        raise InvalidArgumentError(
            f"grid spans [{grid.s_nodes[0]}, {grid.s_nodes[-1]}] but the solver domain is "
            f"[{cfg.s_min}, {cfg.s_max}]"
        )


def _initial_row(cfg: BurgersConfig, s: np.ndarray) -> np.ndarray:
    row = np.array(cfg.ic(np.asarray(s, dtype=float)), dtype=float)
    if not cfg.periodic:
        row[0], row[-1] = cfg.bc_left, cfg.bc_right
    return row


# =====================================================
# Spectral scheme
# =====================================================

class SpectralBurgers:
    """Integrating-factor RK4 on the odd periodic extension."""

    def __init__(self, cfg: BurgersConfig):
        if cfg.bc_left != 0.0 or cfg.bc_right != 0.0 or cfg.periodic:
            raise InvalidArgumentError(
                "the spectral scheme handles homogeneous Dirichlet data only; "
                "use scheme='finite_difference'"
            )
        self.cfg = cfg
        self.n = cfg.n_internal
        self.n_ext = 2 * cfg.n_internal
        self.h = cfg.length / cfg.n_internal
        self.x = cfg.s_min + self.h * np.arange(self.n + 1)

        modes = np.arange(self.n + 1)
        self.k = modes * math.pi / cfg.length
        self.dealias = modes <= (2 * self.n) // 3
        self._factors: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def to_spectrum(self, u_phys: np.ndarray) -> np.ndarray:
        """Odd extension of values on x_0..x_n, then rfft."""
        u = np.array(u_phys, dtype=float)
        u[0] = u[-1] = 0.0
        extended = np.concatenate([u, -u[-2:0:-1]])
        return 1j * np.fft.rfft(extended).imag

    def _nonlinear(self, v: np.ndarray) -> np.ndarray:
        u = np.fft.irfft(v, n=self.n_ext)
        return -0.5j * self.k * np.fft.rfft(u * u) * self.dealias

    def _integrating_factors(self, dt: float) -> tuple[np.ndarray, np.ndarray]:
        if dt not in self._factors:
            half = np.exp(-self.cfg.lam * self.k**2 * dt / 2.0)
            self._factors[dt] = (half, half * half)
        return self._factors[dt]

    def advance(self, v: np.ndarray, dt: float, n_steps: int) -> np.ndarray:
        E, E2 = self._integrating_factors(dt)
        for _ in range(n_steps):
            a = dt * self._nonlinear(v)
            b = dt * self._nonlinear(E * (v + a / 2.0))
            c = dt * self._nonlinear(E * v + b / 2.0)
            d = dt * self._nonlinear(E2 * v + E * c)
            v = E2 * v + (E2 * a + 2.0 * E * (b + c) + d) / 6.0
            # keep the sine-series structure against round-off
            v = 1j * v.imag
        if not np.all(np.isfinite(v)):
            raise InstabilityError(ADVECTIVE_BOUND, details={"dt": dt})
        return v

    def evaluate(self, v: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Trigonometric interpolant of the spectrum at arbitrary points."""
        weights = np.array(v, dtype=complex)
        weights[1:-1] *= 2.0
        weights[-1] = 0.0
        phase = np.exp(1j * np.outer(np.asarray(s) - self.cfg.s_min, self.k))
        return (phase @ weights).real / self.n_ext

    def solve(self, grid: SpaceTimeGrid) -> np.ndarray:
        values = np.empty(grid.shape)
        values[0] = _initial_row(self.cfg, grid.s_nodes)
        v = self.to_spectrum(self.cfg.ic(self.x))
        for k in range(1, grid.T):
            interval = grid.t_nodes[k] - grid.t_nodes[k - 1]
            m = _substeps(interval, self.cfg.dt_internal)
            v = self.advance(v, interval / m, m)
            values[k] = self.evaluate(v, grid.s_nodes)
            logger.debug("Spectral step to t=%.4f with %d substeps", grid.t_nodes[k], m)
        values[1:, 0] = self.cfg.bc_left
        values[1:, -1] = self.cfg.bc_right
        return values


# =====================================================
# Finite-difference model
# =====================================================

def _spacing(cfg: BurgersConfig) -> float:
    return cfg.length / cfg.n_internal if cfg.periodic else cfg.ds


def check_step_stability(cfg: BurgersConfig) -> None:
    """Diffusive RK4 bound of the finite-difference model."""
    ds = _spacing(cfg)
    number = cfg.dt_internal * 4.0 * cfg.lam / ds**2
    if number > RK4_REAL_LIMIT:
        raise InvalidArgumentError(
            f"dt_internal={cfg.dt_internal} violates the diffusive bound {DIFFUSIVE_BOUND} "
            f"(value {number:.3f})"
        )


def _rhs(u: Any, cfg: BurgersConfig) -> Any:
    ds = _spacing(cfg)
    lam = cfg.lam
    if cfg.periodic:
        left = ad.roll(u, 1)
        right = ad.roll(u, -1)
        centre = u
    else:
        left, centre, right = u[:-2], u[1:-1], u[2:]

    backward = (centre - left) / ds
    forward = (right - centre) / ds
    positive = ad.value_of(centre) > 0
    gradient = ad.where(positive, backward, forward)
    du = -(centre * gradient) + (lam / ds**2) * (right - 2.0 * centre + left)

    if cfg.periodic:
        return du
    zero = np.zeros(1)
    return ad.concatenate([zero, du, zero])


def step(state: Any, cfg: BurgersConfig) -> Any:
    """
    One RK4 step of size cfg.dt_internal of the finite-difference model.

    Boundary entries are held at their incoming values.  ``state`` may be a
    tape variable; the result then stays on the tape.
    """
    size = ad.value_of(state).shape
    if size != (cfg.n_internal,):
        raise InvalidArgumentError(
            f"state length {size} does not match n_internal={cfg.n_internal}"
        )
    check_step_stability(cfg)

    dt = cfg.dt_internal
    k1 = _rhs(state, cfg)
    k2 = _rhs(state + (dt / 2.0) * k1, cfg)
    k3 = _rhs(state + (dt / 2.0) * k2, cfg)
    k4 = _rhs(state + dt * k3, cfg)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if not np.all(np.isfinite(ad.value_of(out))):
        raise InstabilityError(
            f"{DIFFUSIVE_BOUND} and dt*max|u|/ds <= 1", details={"dt": dt}
        )
    return out


def propagate(state: Any, cfg: BurgersConfig, n_steps: int) -> Any:
    for _ in range(n_steps):
        state = step(state, cfg)
    return state


def coarse_model(cfg: BurgersConfig, interval: float) -> tuple[Callable[[Any], Any], BurgersConfig]:
    """Map u_t -> u_{t+1} over one grid interval, with the substep config it uses."""
    m = _substeps(interval, cfg.dt_internal)
    sub_cfg = cfg.model_copy(update={"dt_internal": interval / m})
    check_step_stability(sub_cfg)

    def model(u: Any) -> Any:
        return propagate(u, sub_cfg, m)

    return model, sub_cfg


def _solve_finite_difference(cfg: BurgersConfig, grid: SpaceTimeGrid) -> np.ndarray:
    nodes = np.linspace(cfg.s_min, cfg.s_max, cfg.n_internal)
    u = _initial_row(cfg, nodes)
    values = np.empty(grid.shape)
    values[0] = _initial_row(cfg, grid.s_nodes)
    for k in range(1, grid.T):
        model, _ = coarse_model(cfg, grid.t_nodes[k] - grid.t_nodes[k - 1])
        u = model(u)
        values[k] = u if cfg.n_internal == grid.n else np.interp(grid.s_nodes, nodes, u)
    return values


# =====================================================
# Public operations
# =====================================================

def solve(cfg: BurgersConfig, grid: SpaceTimeGrid, scheme: Scheme = "spectral") -> Field:
    """
    Solution sampled on the grid.

    The spectral scheme converges spectrally in n_internal and to fourth order
    in dt.  The finite-difference scheme is first order in space because of the
    upwind advection term: halving ds roughly halves its error, so refinement
    studies should use the spectral scheme.
    """
    _check_domain(cfg, grid)
    if scheme == "spectral":
        values = SpectralBurgers(cfg).solve(grid)
    elif scheme == "finite_difference":
        values = _solve_finite_difference(cfg, grid)
    else:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}")

    if not np.all(np.isfinite(values)):
        raise InstabilityError(ADVECTIVE_BOUND if scheme == "spectral" else DIFFUSIVE_BOUND)
    logger.info(
        "Solved Burgers (lambda=%g, scheme=%s) on %dx%d grid", cfg.lam, scheme, grid.T, grid.n
    )
    return Field(grid, values)


# -------------------------
# Cole-Hopf oracle
@lru_cache(maxsize=16)
def _potential(ic: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> CubicSpline:
    """Antiderivative of the initial condition on [lo, hi]."""
    n_points = min(int((hi - lo) / 1e-3) + 1, 2_000_001)
    y = np.linspace(lo, hi, n_points)
    return CubicSpline(y, ic(y)).antiderivative()


def cole_hopf_reference(
    lam: float,
    ic: Callable[[np.ndarray], np.ndarray],
    s: float,
    t: float,
    domain: tuple[float, float] | None = None,
) -> float:
    """
    Exact viscous Burgers solution at (s, t) via the Cole-Hopf transform.

    Without ``domain`` the heat equation is solved on the real line.  With
    ``domain=(a, b)`` the Neumann Green's function of [a, b] (method of images)
    is used, which corresponds to zero Dirichlet data for u.
    """
    if t <= 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")
    if lam <= 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")

    sigma = math.sqrt(2.0 * lam * t)
    nodes = np.linspace(-50.0, 50.0, 2001) if domain is None else np.linspace(*domain, 2001)
    drift = float(np.max(np.abs(ic(nodes)), initial=0.0)) * t
    width = 12.0 * sigma + drift

    if domain is None:
        lo, hi = s - width, s + width
        direct = np.zeros(1)
        reflected = np.zeros(0)
    else:
        a, b = domain
        if not a <= s <= b:
            raise InvalidArgumentError(f"s={s} lies outside the domain {domain}")
        lo, hi = a, b
        period = 2.0 * (b - a)
        k_max = int(math.ceil((width + (b - a)) / period)) + 1
        shifts = period * np.arange(-k_max, k_max + 1)
        # direct images z = s - y - shift, reflected images z = s + y - 2a - shift
        direct = shifts
        reflected = 2.0 * a + shifts

    F = _potential(ic, 10.0 * math.floor(lo / 10.0) - 10.0, 10.0 * math.ceil(hi / 10.0) + 10.0)
    F_s = float(F(s))
    four_lam_t = 4.0 * lam * t

    def integrand(y: float) -> np.ndarray:
        z = np.concatenate([s - y - direct, s + y - reflected])
        g = np.exp(-z * z / four_lam_t)
        weight = math.exp(-(float(F(y)) - F_s) / (2.0 * lam))
        return weight * np.array([g.sum(), (z * g).sum() / t])

    points = [s] if lo < s < hi else None
    value, _, info = integrate.quad_vec(
        integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=2000, points=points, full_output=True
    )
    if not info.success:
        raise QuadratureError(
            f"Cole-Hopf quadrature did not converge at s={s}, t={t}: {info.message}"
        )
    den, num = value
    if not den > 0:
        raise QuadratureError("Cole-Hopf normalization underflowed")
    return float(num / den)


def cole_hopf_field(
    lam: float,
    ic: Callable[[np.ndarray], np.ndarray],
    grid: SpaceTimeGrid,
    domain: tuple[float, float] | None = None,
) -> Field:
    """Oracle on every grid node; row 0 is the initial condition."""
    values = np.empty(grid.shape)
    values[0] = ic(grid.s_nodes)
    if domain is not None:
        values[0, 0] = values[0, -1] = 0.0
    for k in range(1, grid.T):
        t = float(grid.t_nodes[k])
        values[k] = [cole_hopf_reference(lam, ic, float(s), t, domain) for s in grid.s_nodes]
    return Field(grid, values)
