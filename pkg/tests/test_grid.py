"""Tests for grids, fields and observation operators."""

import math

import numpy as np
import pytest

from core.exceptions import InvalidArgumentError
from models.grid import Field, ObservationOperator, apply_observation, build_grid, make_mask


class TestBuildGrid:
    """Tests for grid construction."""

    def test_reference_grid(self):
        """Test the 51 x 25 reference grid spacing and shape."""
        grid = build_grid(51, 25, -math.pi, math.pi, 5.0)

        assert grid.shape == (25, 51)
        assert grid.ds == pytest.approx(2 * math.pi / 50)
        assert grid.dt == pytest.approx(5.0 / 24)
        assert grid.boundary_idx == (0, 50)
        assert grid.ic_time_idx == 0

    def test_points_are_time_major(self, tiny_grid):
        """Test that points() enumerates space fastest."""
        pts = tiny_grid.points()

        assert pts.shape == (45, 2)
        assert pts[0].tolist() == [tiny_grid.s_nodes[0], 0.0]
        assert pts[1, 0] == tiny_grid.s_nodes[1]
        assert pts[9].tolist() == [tiny_grid.s_nodes[0], tiny_grid.t_nodes[1]]

    @pytest.mark.parametrize(
        "args",
        [(2, 5, -1.0, 1.0, 1.0), (5, 1, -1.0, 1.0, 1.0), (5, 5, 1.0, 1.0, 1.0), (5, 5, -1.0, 1.0, 0.0)],
    )
    def test_invalid_arguments(self, args):
        """Test rejection of degenerate grids."""
        with pytest.raises(InvalidArgumentError):
            build_grid(*args)

    def test_same_as(self, tiny_grid):
        """Test grid equality by node values."""
        assert tiny_grid.same_as(build_grid(9, 5, -math.pi, math.pi, 1.0))
        assert not tiny_grid.same_as(build_grid(9, 5, -math.pi, math.pi, 2.0))


class TestMask:
    """Tests for the fixed-in-time missing-column mask."""

    def test_reference_counts(self):
        """Test that half of 51 columns missing leaves 650 observed entries."""
        grid = build_grid(51, 25, -math.pi, math.pi, 5.0)
        mask = make_mask(grid, 0.5, seed=1)

        assert mask.sum() == 650
        assert (mask == mask[0]).all()

    def test_deterministic(self, tiny_grid):
        """Test that the same seed gives the same mask."""
        assert np.array_equal(make_mask(tiny_grid, 0.4, 3), make_mask(tiny_grid, 0.4, 3))

    def test_extremes(self, tiny_grid):
        """Test fractions 0 and 1."""
        assert make_mask(tiny_grid, 0.0, 0).all()
        assert not make_mask(tiny_grid, 1.0, 0).any()

    def test_invalid_fraction(self, tiny_grid):
        """Test rejection of fractions outside [0, 1]."""
        with pytest.raises(InvalidArgumentError):
            make_mask(tiny_grid, 1.5, 0)


class TestField:
    """Tests for field validation."""

    def test_shape_mismatch(self, tiny_grid):
        """Test rejection of values with the wrong shape."""
        with pytest.raises(InvalidArgumentError):
            Field(tiny_grid, np.zeros((4, 9)))

    def test_nan_allowed_only_where_unobserved(self, tiny_grid):
        """Test NaN handling at unobserved and observed entries."""
        values = np.zeros(tiny_grid.shape)
        mask = np.ones(tiny_grid.shape, dtype=bool)
        values[2, 3] = np.nan
        mask[2, 3] = False
        field = Field(tiny_grid, values, mask)
        assert not field.fully_observed

        with pytest.raises(InvalidArgumentError):
            Field(tiny_grid, values)

    def test_values_are_read_only(self, tiny_grid):
        """Test that field arrays cannot be mutated."""
        field = Field(tiny_grid, np.zeros(tiny_grid.shape))
        with pytest.raises(ValueError):
            field.values[0, 0] = 1.0


class TestObservationOperator:
    """Tests for incidence matrices."""

    def test_matrix_selects_observed_entries(self, tiny_grid, rng):
        """Test that H_t u equals the observed sub-vector."""
        mask = make_mask(tiny_grid, 0.5, 11)
        op = ObservationOperator.from_mask(mask)
        state = Field(tiny_grid, rng.standard_normal(tiny_grid.shape))

        for k in range(tiny_grid.T):
            H = op.matrix(k)
            np.testing.assert_array_equal(H @ state.values[k], apply_observation(op, state, k))
            assert H.shape == (mask[k].sum(), tiny_grid.n)

    def test_scatter_is_transpose(self, tiny_grid, rng):
        """Test that scatter applies H_t^T."""
        op = ObservationOperator.from_mask(make_mask(tiny_grid, 0.5, 2))
        z = rng.standard_normal(op.indices[1].size)

        np.testing.assert_array_equal(op.scatter(z, 1), op.matrix(1).T @ z)

    def test_identity(self, tiny_grid):
        """Test the full-observation operator."""
        op = ObservationOperator.identity(tiny_grid)
        np.testing.assert_array_equal(op.matrix(0), np.eye(tiny_grid.n))

    def test_out_of_range(self, tiny_grid):
        """Test rejection of bad indices and time points."""
        op = ObservationOperator.identity(tiny_grid)
        with pytest.raises(InvalidArgumentError):
            op.matrix(tiny_grid.T)
        with pytest.raises(InvalidArgumentError):
            ObservationOperator((np.array([0, 9]),), n=9)
        with pytest.raises(InvalidArgumentError):
            ObservationOperator((np.array([1, 1]),), n=9)
