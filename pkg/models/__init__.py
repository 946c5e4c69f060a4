"""
Models package - grids and fields.

The simulator (``models.simulation``) and the hierarchical model
(``models.bpinn``) depend on the numerical engines and are imported from
their modules directly.
"""

from models.grid import (
    Field,
    ObservationOperator,
    SpaceTimeGrid,
    apply_observation,
    build_grid,
    make_mask,
)

__all__ = [
    "SpaceTimeGrid",
    "Field",
    "ObservationOperator",
    "build_grid",
    "make_mask",
    "apply_observation",
]
