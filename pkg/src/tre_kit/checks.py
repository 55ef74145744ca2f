"""Margin functions for the TRE inequalities.

Each function returns ``right-hand side - left-hand side`` for one instance of
an inequality, so a non-negative margin certifies that instance. Inputs are
validated; the suite runner calls the same code on generated matrices.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .divergences import (
    _rel_entropy_value,
    _tre_value,
    check_a,
    scalar_rel_entropy,
    tre_limit,
    tre_scalar,
)
from .frechet import DividedDifferenceKernel
from .operators import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_psd,
    as_state,
    check_same_dim,
    log_on_support,
    positive_part,
)

CHAIN_TOL = 1e-12


class Triangle2Margins(NamedTuple):
    tight: float
    linear: float
    chain: float


class Rbts2Margins(NamedTuple):
    upper: float
    lower: float


class RbtsMargins(NamedTuple):
    upper: float
    lower: float
    eq_form: float
    eq_form_lower: float


class TderivMargins(NamedTuple):
    lower: float
    upper: float


def _states(tol, *mats):
    out = [as_state(m, tol) for m in mats]
    check_same_dim(*out)
    return out


def _psds(tol, *mats):
    out = [as_psd(m, tol) for m in mats]
    check_same_dim(*out)
    return out


def _trace(X: np.ndarray) -> float:
    return float(np.trace(X).real)


def _trace_distance(rho1, rho2, tol):
    return _trace(positive_part(rho1 - rho2, tol))


def linear_coefficient(a: float) -> float:
    """``(1 - a) / (-a log a)``; at least 1 on ``(0, 1)``."""
    return (1.0 - a) / (-a * math.log(a))


def tight_bound_first(a: float, t: float) -> float:
    """Bound on the first-argument variation, ``t - S_a(t || 1)``."""
    return t - tre_scalar(a, t, 1.0)


def tight_bound_second(a: float, t: float) -> float:
    """Bound on the second-argument variation, ``1 - S_a(1 || t)``."""
    return 1.0 - tre_scalar(a, 1.0, t)


def check_triangle1(a, rho1, rho2, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    a = check_a(a)
    rho1, rho2, sigma = _states(tol, rho1, rho2, sigma)
    return _triangle1(a, rho1, rho2, sigma, tol)


def _triangle1(a, rho1, rho2, sigma, tol):
    t = _trace_distance(rho1, rho2, tol)
    diff = abs(_tre_value(a, rho1, sigma, tol) - _tre_value(a, rho2, sigma, tol))
    return tight_bound_first(a, t) - diff


def check_triangle2(a, rho, sigma1, sigma2, tol: ToleranceConfig = DEFAULT_TOL) -> Triangle2Margins:
    """Margins of both second-argument bounds plus their ordering."""
    a = check_a(a)
    rho, sigma1, sigma2 = _states(tol, rho, sigma1, sigma2)
    return _triangle2(a, rho, sigma1, sigma2, tol)


def _triangle2(a, rho, sigma1, sigma2, tol):
    t = _trace_distance(sigma1, sigma2, tol)
    diff = abs(_tre_value(a, rho, sigma1, tol) - _tre_value(a, rho, sigma2, tol))
    tight = tight_bound_second(a, t)
    linear = linear_coefficient(a) * t
    return Triangle2Margins(tight - diff, linear - diff, linear - tight)


def check_rbts2(A, B, X, tol: ToleranceConfig = DEFAULT_TOL) -> Rbts2Margins:
    A, B, X = _psds(tol, A, B, X)
    return _rbts2(A, B, X, tol)


def _rbts2(A, B, X, tol):
    b, x = _trace(B), _trace(X)
    outer = _rel_entropy_value(A, A + X, tol)
    middle = _rel_entropy_value(A + B, A + B + X, tol)
    return Rbts2Margins(outer - middle, middle - outer - scalar_rel_entropy(b, b + x))


def check_rbts(A, B, X, tol: ToleranceConfig = DEFAULT_TOL) -> RbtsMargins:
    """Chain ``S(X||A+X) >= S(X||A+B+X) >= S(X||A+X) + S(x||b+x)`` and its state form.

    The state form is evaluated for ``rho = X / x`` with ``A / x`` and
    ``B / x``, through matrix logarithms rather than relative entropies.
    """
    A, B, X = _psds(tol, A, B, X)
    return _rbts(A, B, X, tol)


def _rbts(A, B, X, tol):
    b, x = _trace(B), _trace(X)
    near = _rel_entropy_value(X, A + X, tol)
    far = _rel_entropy_value(X, A + B + X, tol)
    rho, A1, B1 = X / x, A / x, B / x
    gap = _trace(rho @ (log_on_support(rho + A1 + B1, tol) - log_on_support(rho + A1, tol)))
    return RbtsMargins(
        near - far,
        far - near - scalar_rel_entropy(x, b + x),
        math.log1p(b / x) - gap,
        gap,
    )


def eq_form_gap(rho, A, B, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``trace rho (log(rho + A + B) - log(rho + A))``; lies in ``[0, log(1 + trace B)]``."""
    rho = as_state(rho, tol)
    A, B = _psds(tol, A, B)
    return _trace(rho @ (log_on_support(rho + A + B, tol) - log_on_support(rho + A, tol)))


def _quadratic_form(kernel: DividedDifferenceKernel, X: np.ndarray) -> float:
    return _trace(X @ kernel.t(X))


def check_tderiv(A, B, X, tol: ToleranceConfig = DEFAULT_TOL) -> TderivMargins:
    A, B, X = _psds(tol, A, B, X)
    return _tderiv(A, B, X, tol)


def _tderiv(A, B, X, tol):
    b, x = _trace(B), _trace(X)
    d = (
        _quadratic_form(DividedDifferenceKernel.from_matrix(A + X, tol), X)
        - _quadratic_form(DividedDifferenceKernel.from_matrix(A + B + X, tol), X)
    )
    bound = 0.0 if b + x == 0.0 else b * x / (b + x)
    return TderivMargins(d, bound - d)


def lieb1_margin(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``trace (A+B) R_{A+B}(A) - trace A T_{A+B}(A)``."""
    A, B = _psds(tol, A, B)
    kernel = DividedDifferenceKernel.from_matrix(A + B, tol)
    return _trace((A + B) @ kernel.r(A)) - _quadratic_form(kernel, A)


def lieb2_margin(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``1 - lambda_max(R_{A+B}(A))``."""
    A, B = _psds(tol, A, B)
    R = DividedDifferenceKernel.from_matrix(A + B, tol).r(A)
    return 1.0 - float(np.linalg.eigvalsh(R)[-1])


def lemma_f_margin(alpha: float, beta: float, gamma: float, grid: int = 201) -> float:
    """``min_t (1-t) f(t) - f(0)`` for ``f(t) = alpha t^2 + beta t + gamma`` on ``[0, 1]``.

    Requires ``alpha >= 0`` (convexity),
    ``f(0) = gamma <= 0`` and ``f(0) <= f'(0) = beta``.
    """
    if alpha < 0 or gamma > 0 or gamma > beta:
        raise ValueError("need alpha >= 0, gamma <= 0 and gamma <= beta")
    t = np.linspace(0.0, 1.0, grid)
    f = alpha * t**2 + beta * t + gamma
    return float(np.min((1.0 - t) * f) - gamma)


def s0_linearity_margin(lam: float, rho1, rho2, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``-|S_0(mix || sigma) - (lam S_0(rho1||sigma) + (1-lam) S_0(rho2||sigma))|``."""
    mixed = tre_limit(0, lam * rho1 + (1.0 - lam) * rho2, sigma, tol)
    parts = lam * tre_limit(0, rho1, sigma, tol) + (1.0 - lam) * tre_limit(0, rho2, sigma, tol)
    return -abs(mixed - parts)


def s1_fannes_margin(rho, sigma1, sigma2, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``T(sigma1, sigma2) - |S_1(rho||sigma1) - S_1(rho||sigma2)|``."""
    s1_diff = abs(tre_limit(1, rho, sigma1, tol) - tre_limit(1, rho, sigma2, tol))
    return _trace_distance(sigma1, sigma2, tol) - s1_diff
