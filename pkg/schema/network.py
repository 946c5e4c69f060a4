"""Pydantic schema for the fully connected surrogate network."""

import math
from typing import Literal, NamedTuple

from pydantic import BaseModel, ConfigDict, Field


class LayerLayout(NamedTuple):
    """Offsets of one dense layer inside the flat weight vector."""

    weight: slice
    weight_shape: tuple[int, int]
    bias: slice


class NeuralNetSpec(BaseModel):
    """
    Dense tanh network (s, t) -> u.

    Flat layout: for each layer in order, the weight matrix (fan_in x fan_out,
    row-major) followed by its bias vector.  Inputs are normalized as
    s / s_scale and 2 t / t_scale - 1 before the first layer.
    """

    model_config = ConfigDict(frozen=True)

    input_dim: Literal[2] = 2
    hidden_layers: int = Field(default=3, ge=1)
    hidden_width: int = Field(default=16, ge=1)
    output_dim: Literal[1] = 1
    activation: Literal["tanh"] = "tanh"
    s_scale: float = Field(default=math.pi, gt=0)
    t_scale: float = Field(default=5.0, gt=0)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]

    @property
    def n_params(self) -> int:
        sizes = self.layer_sizes
        return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:], strict=True))

    def layout(self) -> list[LayerLayout]:
        layers = []
        offset = 0
        sizes = self.layer_sizes
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:], strict=True):
            weight = slice(offset, offset + fan_in * fan_out)
            offset = weight.stop
            bias = slice(offset, offset + fan_out)
            offset = bias.stop
            layers.append(LayerLayout(weight, (fan_in, fan_out), bias))
        return layers

    def output_bias_index(self) -> int:
        return self.layout()[-1].bias.start
