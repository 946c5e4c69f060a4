"""Numerics package - autodiff, random fields, solvers, samplers and baselines."""

from numerics.assimilation import (
    background_covariance,
    kalman_filter,
    kalman_smoother,
    optimal_interpolation,
    var3d_objective,
    var4d,
)
from numerics.autodiff import Tape, Var, finite_difference_gradient, grad, input_derivs, jacobian, value_and_grad
from numerics.burgers import coarse_model, cole_hopf_reference, solve, step
from numerics.diagnostics import diagnostics, effective_sample_size, split_rhat, summarize_draws
from numerics.nuts import PosteriorSamples, nuts_sample
from numerics.pnm import operator_kernel, pnm_solve
from numerics.random_fields import cholesky_with_jitter, cov_matrix, gp_condition, sample_gp

__all__ = [
    # Autodiff
    "Tape",
    "Var",
    "value_and_grad",
    "grad",
    "jacobian",
    "input_derivs",
    "finite_difference_gradient",
    # Random fields
    "cov_matrix",
    "cholesky_with_jitter",
    "sample_gp",
    "gp_condition",
    # Burgers
    "solve",
    "step",
    "coarse_model",
    "cole_hopf_reference",
    # Inference
    "nuts_sample",
    "PosteriorSamples",
    "diagnostics",
    "effective_sample_size",
    "split_rhat",
    "summarize_draws",
    # Baselines
    "optimal_interpolation",
    "var3d_objective",
    "kalman_filter",
    "kalman_smoother",
    "var4d",
    "background_covariance",
    "operator_kernel",
    "pnm_solve",
]
