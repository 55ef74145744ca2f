"""Telescopic relative entropy: values, limits, gradients and inequality checks."""

from .divergences import (
    DivergenceResult,
    grad1_rel,
    grad1_tre,
    grad2_rel,
    grad2_tre,
    operator_rel_entropy,
    operator_tre,
    rel_entropy,
    tre,
    tre_limit,
    tre_scalar,
)
from .frechet import DividedDifferenceKernel, quadrature_r_map, quadrature_t_map, r_map, t_map
from .operators import (
    SpectralDecomposition,
    ToleranceConfig,
    log_on_support,
    positive_part,
    spectral_decompose,
    support_projector,
    trace_distance,
)

__version__ = "0.1.0"
