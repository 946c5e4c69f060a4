"""
Space-time grids, fields on them, and per-time incidence operators.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpaceTimeGrid:
    """Equally spaced 1-D spatial nodes crossed with time points."""

    s_nodes: np.ndarray
    t_nodes: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.s_nodes, dtype=float)
        t = np.asarray(self.t_nodes, dtype=float)
        if s.ndim != 1 or s.size < 2 or np.any(np.diff(s) <= 0):
            raise InvalidArgumentError("s_nodes must be strictly increasing")
        if t.ndim != 1 or t.size < 1 or np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("t_nodes must be strictly increasing")
        s.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "s_nodes", s)
        object.__setattr__(self, "t_nodes", t)

    @property
    def n(self) -> int:
        return int(self.s_nodes.size)

    @property
    def T(self) -> int:
        return int(self.t_nodes.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.T, self.n)

    @property
    def boundary_idx(self) -> tuple[int, int]:
        return (0, self.n - 1)

    @property
    def ic_time_idx(self) -> int:
        return 0

    @property
    def ds(self) -> float:
        return float(self.s_nodes[1] - self.s_nodes[0])

    @property
    def dt(self) -> float:
        return float(self.t_nodes[1] - self.t_nodes[0]) if self.T > 1 else 0.0

    def points(self) -> np.ndarray:
        """All (s, t) pairs in time-major order, shape (T*n, 2)."""
        tt, ss = np.meshgrid(self.t_nodes, self.s_nodes, indexing="ij")
        return np.column_stack([ss.ravel(), tt.ravel()])

    def same_as(self, other: "SpaceTimeGrid") -> bool:
        return np.array_equal(self.s_nodes, other.s_nodes) and np.array_equal(
            self.t_nodes, other.t_nodes
        )


@dataclass(frozen=True, eq=False)
class Field:
    """Real values on a grid, time-major (T, n), with an observed mask."""

    grid: SpaceTimeGrid
    values: np.ndarray
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise InvalidArgumentError(
                f"field shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        mask = (
            np.ones(self.grid.shape, dtype=bool)
            if self.mask is None
            else np.array(self.mask, dtype=bool)
        )
        if mask.shape != self.grid.shape:
            raise InvalidArgumentError("mask shape does not match grid shape")
        if not np.all(np.isfinite(values[mask])):
            raise InvalidArgumentError("field has non-finite values at observed entries")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def fully_observed(self) -> bool:
        return bool(self.mask.all())


@dataclass(frozen=True)
class ObservationOperator:
    """Per-time lists of observed state indices (the incidence matrices H_t)."""

    indices: tuple[np.ndarray, ...]
    n: int

    def __post_init__(self) -> None:
        cleaned = []
        for t, idx in enumerate(self.indices):
            idx = np.asarray(idx, dtype=np.intp)
            if idx.size and (idx.min() < 0 or idx.max() >= self.n):
                raise InvalidArgumentError(f"observation indices out of range at time {t}")
            if np.unique(idx).size != idx.size:
                raise InvalidArgumentError(f"duplicate observation indices at time {t}")
            idx.setflags(write=False)
            cleaned.append(idx)
        object.__setattr__(self, "indices", tuple(cleaned))

    @classmethod
    def identity(cls, grid: SpaceTimeGrid) -> "ObservationOperator":
        return cls(tuple(np.arange(grid.n) for _ in range(grid.T)), grid.n)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "ObservationOperator":
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(np.flatnonzero(row) for row in mask), mask.shape[1])

    @property
    def T(self) -> int:
        return len(self.indices)

    def matrix(self, t_index: int) -> np.ndarray:
        """Dense incidence matrix H_t."""
        idx = self._at(t_index)
        H = np.zeros((idx.size, self.n))
        H[np.arange(idx.size), idx] = 1.0
        return H

    def scatter(self, values: np.ndarray, t_index: int) -> np.ndarray:
        """Transpose of H_t applied to an observation vector."""
        idx = self._at(t_index)
        values = np.asarray(values, dtype=float)
        if values.shape != idx.shape:
            raise InvalidArgumentError(
                f"expected {idx.size} observations at time {t_index}, got {values.size}"
            )
        state = np.zeros(self.n)
        state[idx] = values
        return state

    def _at(self, t_index: int) -> np.ndarray:
        if not 0 <= t_index < self.T:
            raise InvalidArgumentError(f"time index {t_index} out of range [0, {self.T})")
        return self.indices[t_index]


# =====================================================
# Operations
# =====================================================

def build_grid(n: int, T: int, s_min: float, s_max: float, t_max: float) -> SpaceTimeGrid:
    """Equally spaced grid with s in [s_min, s_max] and t in [0, t_max]."""
    if n < 3:
        raise InvalidArgumentError(f"n must be at least 3, got {n}")
    if T < 2:
        raise InvalidArgumentError(f"T must be at least 2, got {T}")
    if not s_min < s_max:
        raise InvalidArgumentError(f"s_min ({s_min}) must be smaller than s_max ({s_max})")
    if not t_max > 0:
        raise InvalidArgumentError(f"t_max must be positive, got {t_max}")

    grid = SpaceTimeGrid(np.linspace(s_min, s_max, n), np.linspace(0.0, t_max, T))
    logger.debug("Built %dx%d grid on [%g, %g] x [0, %g]", T, n, s_min, s_max, t_max)
    return grid


def make_mask(grid: SpaceTimeGrid, missing_fraction: float, seed: int) -> np.ndarray:
    """
    Missing spatial columns fixed across time.

    floor(missing_fraction * n) columns are drawn by a seeded shuffle and marked
    missing at every time point.
    """
    if not 0.0 <= missing_fraction <= 1.0:
        raise InvalidArgumentError(f"missing_fraction must lie in [0, 1], got {missing_fraction}")

    n_missing = int(np.floor(missing_fraction * grid.n + 1e-12))
    rng = np.random.default_rng(seed)
    missing_cols = rng.permutation(grid.n)[:n_missing]

    mask = np.ones(grid.shape, dtype=bool)
    mask[:, missing_cols] = False
    return mask


def apply_observation(op: ObservationOperator, state: Field, t_index: int) -> np.ndarray:
    """State values at the observed indices of time t_index, in index order."""
    if op.n != state.grid.n:
        raise InvalidArgumentError("operator and field have different spatial sizes")
    if not 0 <= t_index < state.grid.T:
        raise InvalidArgumentError(f"time index {t_index} out of range [0, {state.grid.T})")
    return state.values[t_index, op._at(t_index)].copy()
