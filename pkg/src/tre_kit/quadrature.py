"""Composite Gauss-Legendre quadrature on the half line ``[0, inf)``.

Used as an independent oracle for the resolvent integrals: the integrand is
evaluated with dense linear solves only, never with an eigendecomposition.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadratureNonConvergence

GL_ORDER = 16
MAX_NODES = 2**14


@lru_cache(maxsize=None)
def _reference_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _mapped_rule(anchor: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    # s = anchor * t / (1 - t) maps t in [0, 1) onto [0, inf)
    x, w = _reference_rule(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = np.diff(edges)
    t = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    wt = (h[:, None] * w[None, :]).ravel()
    s = anchor * t / (1.0 - t)
    ds = anchor / (1.0 - t) ** 2
    return s, wt * ds


def integrate_half_line(
    integrand: Callable[[np.ndarray], np.ndarray],
    anchor: float,
    panels: int = 8,
    order: int = GL_ORDER,
    rtol: float = 1e-10,
    max_nodes: int = MAX_NODES,
) -> np.ndarray:
    """Integrate ``integrand(s)`` over ``s in [0, inf)``.

    ``integrand`` receives a 1-D array of nodes and returns an array whose
    leading axis runs over the nodes. The panel count doubles until two
    successive estimates agree to ``rtol * max(1, |estimate|)``.

    Raises
    ------
    QuadratureNonConvergence
        If the node count would exceed ``max_nodes``.
    """
    if not anchor > 0.0:
        raise ValueError(f"anchor must be positive, got {anchor!r}")
    if panels < 1:
        raise ValueError("need at least one panel")

    def estimate(p):
        s, w = _mapped_rule(anchor, p, order)
        vals = np.asarray(integrand(s))
        return np.tensordot(w, vals, axes=(0, 0))

    previous = estimate(panels)
    while 2 * panels * order <= max_nodes:
        panels *= 2
        current = estimate(panels)
        scale = max(1.0, float(np.max(np.abs(current))))
        if np.max(np.abs(current - previous)) <= rtol * scale:
            return current
        previous = current
    raise QuadratureNonConvergence(
        f"no convergence to rtol={rtol:g} within {max_nodes} nodes"
    )


def resolvents(A: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Stack of ``(A + s_k I)^{-1}`` for every node ``s_k``."""
    n = A.shape[0]
    shifted = A[None, :, :] + s[:, None, None] * np.eye(n)[None, :, :]
    return np.linalg.inv(shifted)


def spectral_anchor(A: np.ndarray) -> float:
    """Geometric mean of the extreme eigenvalues of a positive definite ``A``.

    Putting the centre of the substitution there keeps the resolvent poles
    equally far (in the mapped variable) from both ends of ``[0, 1)``.
    """
    lam = np.linalg.eigvalsh(A)
    if lam[0] <= 0.0:
        raise ValueError("quadrature oracle requires a positive definite matrix")
    return float(np.sqrt(lam[0] * lam[-1]))
