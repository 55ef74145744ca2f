"""First and second Frechet derivatives of the matrix logarithm.

``t_map(A, D)`` is ``d/dt log(A + tD)`` at ``t = 0`` and ``r_map(A, D)`` is
``-d^2/dt^2 log(A + tD)`` at ``t = 0``. Both are evaluated in the eigenbasis
of ``A`` with divided differences of ``log`` (Daleckii-Krein), restricted to
the support of ``A``. The ``quadrature_*`` functions integrate the resolvent
representations directly and serve as independent oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import SupportMismatch
from .operators import (
    DEFAULT_TOL,
    MatrixLike,
    SpectralDecomposition,
    ToleranceConfig,
    as_hermitian,
    check_same_dim,
    spectral_decompose,
)
from .quadrature import integrate_half_line, resolvents, spectral_anchor

SUPPORT_LEAK_TOL = 1e-10


def log_divided_difference(x: np.ndarray, y: np.ndarray, confluence_tol: float) -> np.ndarray:
    """Elementwise ``(log x - log y) / (x - y)`` with its confluent limit.

    Arguments must be strictly positive and broadcast against each other.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    diff = x - y
    confluent = np.abs(diff) <= confluence_tol * np.maximum(x, y)
    near = ~confluent & (x <= 2.0 * y) & (y <= 2.0 * x)
    far = ~confluent & ~near
    out = np.empty_like(x)
    out[confluent] = 2.0 / (x[confluent] + y[confluent])
    out[near] = np.log1p(diff[near] / y[near]) / diff[near]
    out[far] = (np.log(x[far]) - np.log(y[far])) / diff[far]
    return out


def log_second_divided_difference(
    x: np.ndarray, y: np.ndarray, z: np.ndarray, confluence_tol: float
) -> np.ndarray:
    """Elementwise second divided difference ``log[x, y, z]``.

    The arguments are sorted so that the outer pair carries the largest gap;
    one-sided confluent cases then fall out of the first-order limits, and a
    fully confluent triple uses ``-1 / (2 m^2)`` at the mean ``m``.
    """
    stacked = np.sort(np.stack(np.broadcast_arrays(x, y, z)).astype(float), axis=0)
    lo, mid, hi = stacked
    spread = hi - lo
    confluent = spread <= confluence_tol * hi
    out = np.empty_like(lo)
    m = (lo[confluent] + mid[confluent] + hi[confluent]) / 3.0
    out[confluent] = -0.5 / m**2
    keep = ~confluent
    lo, mid, hi = lo[keep], mid[keep], hi[keep]
    out[keep] = (
        log_divided_difference(mid, hi, confluence_tol)
        - log_divided_difference(lo, mid, confluence_tol)
    ) / (hi - lo)
    return out


@dataclass(frozen=True)
class DividedDifferenceKernel:
    """Spectral data of ``A`` needed for ``T_A`` and ``R_A``.

    Build once per ``A`` with :meth:`from_matrix` and reuse for any number
    of directions.
    """

    base: SpectralDecomposition
    support: np.ndarray
    confluence_tol: float
    first_table: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, A: MatrixLike, tol: ToleranceConfig = DEFAULT_TOL) -> "DividedDifferenceKernel":
        dec = spectral_decompose(A, tol, psd=True)
        support = dec.support_mask(tol.rank_tol)
        lam = dec.eigenvalues[support]
        table = log_divided_difference(lam[:, None], lam[None, :], tol.confluence_tol)
        return cls(dec, support, tol.confluence_tol, table)

    @cached_property
    def second_table(self) -> np.ndarray:
        """``F[i, k, j] = log[lam_i, lam_k, lam_j]`` over the support."""
        lam = self.base.eigenvalues[self.support]
        return log_second_divided_difference(
            lam[:, None, None], lam[None, :, None], lam[None, None, :], self.confluence_tol
        )

    def _support_block(self, delta: np.ndarray) -> np.ndarray:
        Y = self.base.in_eigenbasis(delta)
        s = self.support
        if not np.all(s):
            allowed = SUPPORT_LEAK_TOL * float(np.max(np.abs(delta)))
            leak = np.abs(Y[~s, :]).max(initial=0.0)
            if leak > allowed:
                raise SupportMismatch(
                    f"direction leaks outside supp A by {leak:.3e} (allowed {allowed:.3e})"
                )
        return Y[np.ix_(s, s)]

    def _embed(self, block: np.ndarray) -> np.ndarray:
        n = self.base.dim
        Z = np.zeros((n, n), dtype=complex)
        Z[np.ix_(self.support, self.support)] = block
        out = self.base.from_eigenbasis(Z)
        return 0.5 * (out + out.conj().T)

    def t(self, delta: np.ndarray) -> np.ndarray:
        Y = self._support_block(delta)
        return self._embed(Y * self.first_table)

    def r(self, delta: np.ndarray) -> np.ndarray:
        Y = self._support_block(delta)
        block = -2.0 * np.einsum("ik,kj,ikj->ij", Y, Y, self.second_table)
        return self._embed(block)


def _prepare(A, delta, tol):
    D = as_hermitian(delta, tol)
    if isinstance(A, SpectralDecomposition):
        check_same_dim(A.eigenvectors, D)
        return A, D
    A = as_hermitian(A, tol)
    check_same_dim(A, D)
    return A, D


def t_map(A: MatrixLike, delta, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """First derivative of ``log`` at ``A`` in direction ``delta``.

    Raises
    ------
    SupportMismatch
        If ``A`` is singular and ``delta`` is not supported inside ``supp A``.
    """
    A, D = _prepare(A, delta, tol)
    return DividedDifferenceKernel.from_matrix(A, tol).t(D)


def r_map(A: MatrixLike, delta, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Negated second derivative of ``log`` at ``A`` along ``delta``."""
    A, D = _prepare(A, delta, tol)
    return DividedDifferenceKernel.from_matrix(A, tol).r(D)


def _require_positive(A: np.ndarray) -> float:
    try:
        return spectral_anchor(A)
    except ValueError as exc:
        raise SupportMismatch(str(exc)) from exc


def quadrature_t_map(A, delta, panels: int = 8) -> np.ndarray:
    """Quadrature of ``int_0^inf (A+s)^-1 D (A+s)^-1 ds`` for ``A > 0``."""
    A = as_hermitian(A)
    D = as_hermitian(delta)
    check_same_dim(A, D)
    anchor = _require_positive(A)

    def integrand(s):
        R = resolvents(A, s)
        return R @ D @ R

    out = integrate_half_line(integrand, anchor, panels=panels)
    return 0.5 * (out + out.conj().T)


def quadrature_r_map(A, delta, panels: int = 8) -> np.ndarray:
    """Quadrature of ``2 int_0^inf (A+s)^-1 D (A+s)^-1 D (A+s)^-1 ds``."""
    A = as_hermitian(A)
    D = as_hermitian(delta)
    check_same_dim(A, D)
    anchor = _require_positive(A)

    def integrand(s):
        R = resolvents(A, s)
        RD = R @ D
        return 2.0 * RD @ RD @ R

    out = integrate_half_line(integrand, anchor, panels=panels)
    return 0.5 * (out + out.conj().T)
