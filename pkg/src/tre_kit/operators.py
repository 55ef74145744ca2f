"""Dense Hermitian operator primitives.

Matrices are plain complex ``numpy`` arrays. The ``as_*`` validators check
the Hermitian / PSD / unit-trace invariants and return a canonical copy;
everything else is a pure function of its inputs.

Every matrix function here is evaluated through a single
:class:`SpectralDecomposition`, so functions of the same operator stay
mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EigensolverFailure,
    NonHermitianInput,
    NotAState,
    NotPositiveSemidefinite,
)
from .quadrature import integrate_half_line, resolvents, spectral_anchor

TRACE_TOL = 1e-10
PSD_BAND = 1e-12


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical cut-offs used by the spectral routines.

    Parameters
    ----------
    rank_tol : float
        An eigenvalue counts as support iff ``lam > rank_tol * lam_max``.
    confluence_tol : float
        Relative eigenvalue gap below which divided differences switch to
        their confluent (derivative) limits.
    hermiticity_tol : float
        Allowed ``max|X - X^H|`` relative to ``max|X|``.
    """

    rank_tol: float = 1e-10
    confluence_tol: float = 1e-7
    hermiticity_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rank_tol", "confluence_tol", "hermiticity_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")

    def to_dict(self) -> dict:
        return {
            "rank_tol": self.rank_tol,
            "confluence_tol": self.confluence_tol,
            "hermiticity_tol": self.hermiticity_tol,
        }


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def support_mask(self, rank_tol: float) -> np.ndarray:
        lam_max = self.lambda_max
        if lam_max <= 0.0:
            return np.zeros(self.dim, dtype=bool)
        return self.eigenvalues > rank_tol * lam_max

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Return ``U diag(fn(lam)) U^H``."""
        U = self.eigenvectors
        return (U * fn(self.eigenvalues)) @ U.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda lam: lam)

    def in_eigenbasis(self, X: np.ndarray) -> np.ndarray:
        """Express ``X`` in this eigenbasis, ``U^H X U``."""
        U = self.eigenvectors
        return U.conj().T @ X @ U

    def from_eigenbasis(self, Y: np.ndarray) -> np.ndarray:
        U = self.eigenvectors
        return U @ Y @ U.conj().T


MatrixLike = Union[np.ndarray, SpectralDecomposition]


def _square(x) -> np.ndarray:
    X = np.array(x, dtype=complex)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    return X


def as_hermitian(x, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Validate hermiticity and return the exactly Hermitian part of ``x``."""
    X = _square(x)
    scale = np.max(np.abs(X))
    skew = np.max(np.abs(X - X.conj().T))
    if skew > tol.hermiticity_tol * scale:
        raise NonHermitianInput(
            f"max |X - X^H| = {skew:.3e} exceeds {tol.hermiticity_tol:g} * max|X|"
        )
    return 0.5 * (X + X.conj().T)


def _check_psd_spectrum(eigenvalues: np.ndarray) -> None:
    dim = eigenvalues.shape[0]
    lam_max = max(float(eigenvalues[-1]), 0.0)
    floor = -dim * PSD_BAND * lam_max
    if eigenvalues[0] < floor:
        raise NotPositiveSemidefinite(
            f"smallest eigenvalue {eigenvalues[0]:.3e} below clamping band {floor:.3e}"
        )


def as_psd(x, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    X = as_hermitian(x, tol)
    _check_psd_spectrum(np.linalg.eigvalsh(X))
    return X


def as_state(x, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD, unit trace."""
    X = as_psd(x, tol)
    tr = np.trace(X).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotAState(f"trace {tr!r} differs from 1 by more than {TRACE_TOL:g}")
    return X


def check_same_dim(*mats: np.ndarray) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"operands have different dimensions {sorted(dims)}")
    return dims.pop()


def spectral_decompose(H, tol: ToleranceConfig = DEFAULT_TOL, psd: bool = False) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    With ``psd=True`` the input must be PSD up to the clamping band and any
    slightly negative eigenvalues are clamped to zero.
    """
    if isinstance(H, SpectralDecomposition):
        return H
    X = as_hermitian(H, tol)
    try:
        lam, U = np.linalg.eigh(X)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if psd:
        _check_psd_spectrum(lam)
        lam = np.clip(lam, 0.0, None)
    return SpectralDecomposition(lam, U)


def _psd_decomposition(X: MatrixLike, tol: ToleranceConfig) -> SpectralDecomposition:
    if isinstance(X, SpectralDecomposition):
        return X
    return spectral_decompose(X, tol, psd=True)


def support_projector(X: MatrixLike, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the support of a PSD matrix (zero for X = 0)."""
    dec = _psd_decomposition(X, tol)
    mask = dec.support_mask(tol.rank_tol)
    V = dec.eigenvectors[:, mask]
    return V @ V.conj().T


def positive_part(X: MatrixLike, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``(X + |X|) / 2``: negative eigenvalues zeroed in the eigenbasis."""
    dec = spectral_decompose(X, tol)
    return dec.apply(lambda lam: np.clip(lam, 0.0, None))


def trace_distance(rho, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    rho = as_state(rho, tol)
    sigma = as_state(sigma, tol)
    check_same_dim(rho, sigma)
    lam = np.linalg.eigvalsh(rho - sigma)
    # half the trace norm; for equal traces this equals trace (rho - sigma)_+
    t = 0.5 * float(np.sum(np.abs(lam)))
    return min(max(t, 0.0), 1.0)


def log_on_support(X: MatrixLike, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Matrix logarithm on the support of a PSD matrix, zero on its kernel."""
    dec = _psd_decomposition(X, tol)
    mask = dec.support_mask(tol.rank_tol)

    def _log(lam):
        out = np.zeros_like(lam)
        out[mask] = np.log(lam[mask])
        return out

    return dec.apply(_log)


def effective_rank(X: MatrixLike, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    return int(np.count_nonzero(_psd_decomposition(X, tol).support_mask(tol.rank_tol)))


def quadrature_log(X, panels: int = 8) -> np.ndarray:
    """``log X`` for ``X > 0`` from ``int_0^inf (1/(1+s) - (X+s)^-1) ds``.

    Independent of the eigendecomposition route; used as a test oracle.
    """
    X = as_hermitian(X)
    n = X.shape[0]
    eye = np.eye(n)

    def integrand(s):
        return eye[None] / (1.0 + s)[:, None, None] - resolvents(X, s)

    out = integrate_half_line(integrand, spectral_anchor(X), panels=panels)
    return 0.5 * (out + out.conj().T)
