"""Pydantic schema for the viscous Burgers' problem."""

import math
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# RK4 stability interval on the imaginary axis is |z| <= 2.83
RK4_IMAGINARY_LIMIT = 2.8
# RK4 stability interval on the negative real axis is |z| <= 2.785
RK4_REAL_LIMIT = 2.78


def gaussian_bump(s: np.ndarray) -> np.ndarray:
    """u(s, 0) = exp(-s^2)."""
    return np.exp(-np.square(s))


def zero_state(s: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(s, dtype=float))


INITIAL_CONDITIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian_bump": gaussian_bump,
    "zero": zero_state,
}


class BurgersConfig(BaseModel):
    """
    u_t + u u_s = lam * u_ss on [s_min, s_max] with Dirichlet data bc_left/bc_right.

    ``n_internal`` counts solver points on the physical interval and
    ``dt_internal`` is the largest internal time step.  ``periodic`` switches the
    finite-difference model to periodic boundaries.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, populate_by_name=True)

    lam: float = Field(default=0.1, gt=0, alias="lambda")
    n_internal: int = Field(default=256, ge=3)
    dt_internal: float = Field(default=1e-3, gt=0)
    ic: Callable[[np.ndarray], np.ndarray] = Field(default=gaussian_bump, exclude=True)
    bc_left: float = 0.0
    bc_right: float = 0.0
    s_min: float = -math.pi
    s_max: float = math.pi
    periodic: bool = False

    @model_validator(mode="after")
    def check_spectral_stability(self) -> "BurgersConfig":
        if self.s_min >= self.s_max:
            raise ValueError("s_min must be smaller than s_max")
        if self.advective_number() > RK4_IMAGINARY_LIMIT:
            raise ValueError(
                f"dt_internal={self.dt_internal} violates the advective bound "
                f"dt*max|u0|*k_max <= {RK4_IMAGINARY_LIMIT}"
            )
        return self

    @property
    def length(self) -> float:
        return self.s_max - self.s_min

    @property
    def ds(self) -> float:
        """Finite-difference spacing when the state lives on n_internal nodes."""
        return self.length / (self.n_internal - 1)

    def ic_amplitude(self) -> float:
        s = np.linspace(self.s_min, self.s_max, max(self.n_internal, 64))
        return float(np.max(np.abs(self.ic(s)), initial=0.0))

    def advective_number(self, u_max: float | None = None) -> float:
        """dt * max|u| * largest retained wavenumber of the spectral scheme."""
        u_max = self.ic_amplitude() if u_max is None else u_max
        k_max = (2.0 / 3.0) * self.n_internal * math.pi / self.length
        return self.dt_internal * u_max * k_max

    def diffusion_number(self) -> float:
        """dt * 4 lam / ds^2, the stiffest eigenvalue of the central second difference."""
        return self.dt_internal * 4.0 * self.lam / self.ds**2
