"""Relative entropy, telescopic relative entropy (TRE) and their gradients.

The TRE of ``rho`` with respect to ``sigma`` at telescope parameter ``a`` is

    S_a(rho || sigma) = S(rho || a rho + (1 - a) sigma) / (-log a),

which stays in ``[0, 1]`` even when ``S(rho || sigma)`` is infinite.

Functions named ``operator_*`` take unnormalised PSD arguments and return a
bare float; ``rel_entropy`` and ``tre`` validate states and return a
:class:`DivergenceResult`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ParameterOutOfRange, SupportMismatch
from .frechet import DividedDifferenceKernel, t_map
from .operators import (
    DEFAULT_TOL,
    SpectralDecomposition,
    ToleranceConfig,
    as_psd,
    as_state,
    check_same_dim,
    log_on_support,
    spectral_decompose,
    support_projector,
)
from .quadrature import integrate_half_line, resolvents, spectral_anchor

# a must stay this far from 0 and 1; closer values lose all precision
A_MARGIN = 1e-12
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DivergenceResult:
    value: float
    a: Union[float, str]
    support_contained: bool
    effective_ranks: tuple[int, int]
    tol: ToleranceConfig = field(default=DEFAULT_TOL)

    def to_dict(self) -> dict:
        value = "inf" if math.isinf(self.value) else self.value
        return {
            "value": value,
            "a": self.a,
            "support_contained": self.support_contained,
            "effective_ranks": list(self.effective_ranks),
            "tol": self.tol.to_dict(),
        }


def check_a(a: float, margin: float = A_MARGIN) -> float:
    a = float(a)
    if not (margin < a < 1.0 - margin) or math.isnan(a):
        raise ParameterOutOfRange(f"telescope parameter a={a!r} outside ({margin:g}, 1 - {margin:g})")
    return a


def _pairwise_value(dec_a: SpectralDecomposition, dec_b: SpectralDecomposition,
                    keep_a: np.ndarray, keep_b: np.ndarray) -> float:
    """``trace A (log A - log B)`` summed over eigenvector pairs.

    Each pair contributes ``|<a_i|b_j>|^2 a_i (log a_i - log b_j)``, so equal
    spectra cancel term by term instead of through two large traces.
    """
    overlap = np.abs(dec_a.eigenvectors[:, keep_a].conj().T @ dec_b.eigenvectors[:, keep_b]) ** 2
    la, lb = dec_a.eigenvalues[keep_a], dec_b.eigenvalues[keep_b]
    gaps = np.log(la)[:, None] - np.log(lb)[None, :]
    return float(np.sum(overlap * gaps * la[:, None]))


def _support_leak(A: np.ndarray, dec_b: SpectralDecomposition, tol: ToleranceConfig) -> float:
    """Weight ``trace A (1 - {B})`` of ``A`` outside the support of ``B``."""
    kernel = ~dec_b.support_mask(tol.rank_tol)
    V = dec_b.eigenvectors[:, kernel]
    return float(np.einsum("ij,ik,kj->", V.conj(), A, V).real)


def operator_rel_entropy(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``trace A (log A - log B)`` for PSD ``A``, ``B``; ``inf`` if supp A is not in supp B."""
    A = as_psd(A, tol)
    B = as_psd(B, tol)
    check_same_dim(A, B)
    return _rel_entropy(A, B, tol)[0]


def _rel_entropy(A, B, tol):
    dec_a = spectral_decompose(A, tol, psd=True)
    dec_b = spectral_decompose(B, tol, psd=True)
    trace_a = float(np.sum(dec_a.eigenvalues))
    if _support_leak(A, dec_b, tol) > tol.rank_tol * max(trace_a, 0.0):
        return math.inf, dec_a, dec_b
    value = _pairwise_value(dec_a, dec_b, dec_a.eigenvalues > 0.0, dec_b.support_mask(tol.rank_tol))
    return value, dec_a, dec_b


def _telescope_value(a: float, A: np.ndarray, B: np.ndarray, tol: ToleranceConfig):
    """Unscaled ``S(A || aA + (1-a)B)`` and the decompositions used.

    The mixture contains supp A by construction, so no support test is made;
    eigenvalues of the mixture at rounding level are dropped, and the weight
    of ``A`` on them is bounded by that level divided by ``a``.
    """
    # written as B + a(A - B) so that A == B gives C == A bit for bit
    C = B + a * (A - B)
    dec_a = spectral_decompose(A, tol, psd=True)
    dec_c = spectral_decompose(C, tol, psd=True)
    floor = 10 * A.shape[0] * _EPS * max(dec_c.lambda_max, dec_a.lambda_max, 0.0)
    value = _pairwise_value(dec_a, dec_c, dec_a.eigenvalues > floor, dec_c.eigenvalues > floor)
    return value, dec_a, dec_c


def operator_tre(a: float, A, B, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """TRE for unnormalised PSD arguments (homogeneous of degree one)."""
    a = check_a(a)
    A = as_psd(A, tol)
    B = as_psd(B, tol)
    check_same_dim(A, B)
    value, _, _ = _telescope_value(a, A, B, tol)
    return value / -math.log(a)


def rel_entropy(rho, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> DivergenceResult:
    """Umegaki relative entropy of a state with respect to a PSD matrix.

    Returns ``inf`` (with ``support_contained=False``) when the support of
    ``rho`` is not inside that of ``sigma``.
    """
    rho = as_state(rho, tol)
    sigma = as_psd(sigma, tol)
    check_same_dim(rho, sigma)
    value, dec_r, dec_s = _rel_entropy(rho, sigma, tol)
    ranks = (
        int(np.count_nonzero(dec_r.support_mask(tol.rank_tol))),
        int(np.count_nonzero(dec_s.support_mask(tol.rank_tol))),
    )
    return DivergenceResult(value, "ordinary", not math.isinf(value), ranks, tol)


def tre(a: float, rho, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> DivergenceResult:
    """Telescopic relative entropy ``S_a(rho || sigma)`` of two states.

    Raises
    ------
    ParameterOutOfRange
        If ``a`` is not inside ``(1e-12, 1 - 1e-12)``; use :func:`tre_limit`
        for the endpoints.
    """
    a = check_a(a)
    rho = as_state(rho, tol)
    sigma = as_state(sigma, tol)
    check_same_dim(rho, sigma)
    value, dec_r, _ = _telescope_value(a, rho, sigma, tol)
    dec_s = spectral_decompose(sigma, tol, psd=True)
    leak = _support_leak(rho, dec_s, tol)
    ranks = (
        int(np.count_nonzero(dec_r.support_mask(tol.rank_tol))),
        int(np.count_nonzero(dec_s.support_mask(tol.rank_tol))),
    )
    return DivergenceResult(value / -math.log(a), a, leak <= tol.rank_tol, ranks, tol)


def tre_scalar(a: float, b: float, c: float) -> float:
    """TRE of non-negative scalars, ``b (log b - log(ab + (1-a)c)) / (-log a)``.

    Uses ``0 log 0 = 0``, so ``tre_scalar(a, b, 0) == b`` and
    ``tre_scalar(a, 0, c) == 0``.
    """
    if not (0.0 < a < 1.0):
        raise ParameterOutOfRange(f"a={a!r} outside (0, 1)")
    if b < 0 or c < 0:
        raise ParameterOutOfRange("scalar arguments must be non-negative")
    if b == 0.0:
        return 0.0
    if c == 0.0:
        return float(b)
    # log(ab + (1-a)c) - log b = log1p(u); log1p only helps while u is small
    u = (1.0 - a) * (c - b) / b
    shift = math.log1p(u) if abs(u) < 0.5 else math.log(a * b + (1.0 - a) * c) - math.log(b)
    return -b * shift / -math.log(a)


def scalar_rel_entropy(b: float, c: float) -> float:
    """``b (log b - log c)`` with ``0 log 0 = 0``; ``inf`` when ``b > 0 = c``."""
    if b == 0.0:
        return 0.0
    if c == 0.0:
        return math.inf
    return b * (math.log(b) - math.log(c))


def tre_limit(endpoint: int, rho, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Closed-form limit of ``S_a`` as ``a -> 0`` (endpoint 0) or ``a -> 1``.

    ``S_0 = 1 - trace rho {sigma}`` and ``S_1 = 1 - trace sigma {rho}``.
    """
    rho = as_state(rho, tol)
    sigma = as_state(sigma, tol)
    check_same_dim(rho, sigma)
    if endpoint == 0:
        overlap = np.trace(rho @ support_projector(sigma, tol)).real
    elif endpoint == 1:
        overlap = np.trace(sigma @ support_projector(rho, tol)).real
    else:
        raise ParameterOutOfRange(f"endpoint must be 0 or 1, got {endpoint!r}")
    return float(1.0 - overlap)


def quadrature_tre(a: float, rho, sigma, panels: int = 8) -> float:
    """TRE from its resolvent integral; full-rank states only (test oracle)."""
    a = check_a(a)
    rho = as_state(rho)
    sigma = as_state(sigma)
    tau = a * rho + (1.0 - a) * sigma
    anchor = min(spectral_anchor(rho), spectral_anchor(tau))

    def integrand(s):
        diff = resolvents(rho, s) - resolvents(tau, s)
        return np.einsum("ij,kji->k", rho, diff).real

    return float(integrate_half_line(integrand, anchor, panels=panels)) / math.log(a)


# -- gradients ---------------------------------------------------------------


def _contained(A, B, tol):
    dec_b = spectral_decompose(B, tol, psd=True)
    trace_a = float(np.trace(A).real)
    if _support_leak(A, dec_b, tol) > tol.rank_tol * max(trace_a, 0.0):
        raise SupportMismatch("support of the first argument is not inside the second")
    return dec_b


def grad1_rel(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Gradient of ``S(A||B)`` in ``A``: ``log A - log B + {A}``."""
    A = as_psd(A, tol)
    B = as_psd(B, tol)
    check_same_dim(A, B)
    dec_b = _contained(A, B, tol)
    dec_a = spectral_decompose(A, tol, psd=True)
    return log_on_support(dec_a, tol) - log_on_support(dec_b, tol) + support_projector(dec_a, tol)


def grad2_rel(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Gradient of ``S(A||B)`` in ``B``: ``-T_B(A)``."""
    A = as_psd(A, tol)
    B = as_psd(B, tol)
    check_same_dim(A, B)
    dec_b = _contained(A, B, tol)
    return -t_map(dec_b, A, tol)


def grad1_tre(a: float, A, B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Gradient of ``S_a(A||B)`` in ``A``.

    ``(log A - log C + {A} - a T_C(A)) / (-log a)`` with ``C = aA + (1-a)B``.
    """
    a = check_a(a)
    A = as_psd(A, tol)
    B = as_psd(B, tol)
    check_same_dim(A, B)
    dec_a = spectral_decompose(A, tol, psd=True)
    kernel = DividedDifferenceKernel.from_matrix(a * A + (1.0 - a) * B, tol)
    grad = (
        log_on_support(dec_a, tol)
        - log_on_support(kernel.base, tol)
        + support_projector(dec_a, tol)
        - a * kernel.t(A)
    )
    return grad / -math.log(a)


def grad2_tre(a: float, A, B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Gradient of ``S_a(A||B)`` in ``B``: ``-(1-a) T_C(A) / (-log a)``.

    ``C = aA + (1-a)B`` is the telescoped second argument. This is the
    chain-rule form; the finite-difference tests pin it down.
    """
    a = check_a(a)
    A = as_psd(A, tol)
    B = as_psd(B, tol)
    check_same_dim(A, B)
    C = a * A + (1.0 - a) * B
    return -(1.0 - a) / -math.log(a) * t_map(C, A, tol)


# -- unvalidated fast paths for trusted (generated) inputs --------------------


def _tre_value(a: float, A: np.ndarray, B: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    return _telescope_value(a, A, B, tol)[0] / -math.log(a)


def _rel_entropy_value(A: np.ndarray, B: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    return _rel_entropy(A, B, tol)[0]
