"""Seeded random ensembles of states and PSD operators.

Every trial draws from its own generator seeded by ``(seed, trial_index)``,
so a trial can be replayed in isolation and results do not depend on the
order in which trials run.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import InvalidSpec

FAMILIES = ("generic_mixed", "haar_pure", "commuting_diagonal", "orthogonal_blocks")
_DEFICIENT = re.compile(r"^deficient(?:\((\d+)\))?$")


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def parse_rank_profile(profile: str, dim: int) -> int:
    """Rank implied by ``full``, ``pure``, ``deficient`` or ``deficient(k)``.

    Bare ``deficient`` means ``max(1, dim // 2)``.
    """
    if profile == "full":
        return dim
    if profile == "pure":
        return 1
    m = _DEFICIENT.match(profile)
    if m is None:
        raise InvalidSpec(f"unknown rank profile {profile!r}")
    k = int(m.group(1)) if m.group(1) else max(1, dim // 2)
    if not 1 <= k <= dim:
        raise InvalidSpec(f"deficient rank {k} outside [1, {dim}]")
    return k


@dataclass(frozen=True)
class EnsembleSpec:
    dim: int
    rank_profile: str = "full"
    family: str = "generic_mixed"
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise InvalidSpec(f"dim must be an integer >= 2, got {self.dim!r}")
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}")
        if self.trials < 1:
            raise InvalidSpec("trials must be >= 1")
        if self.seed < 0:
            raise InvalidSpec("seed must be non-negative")
        parse_rank_profile(self.rank_profile, self.dim)

    @property
    def rank(self) -> int:
        return parse_rank_profile(self.rank_profile, self.dim)


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(rng, dim, dim))
    phases = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * phases


def random_state(rng: np.random.Generator, dim: int, rank: Optional[int] = None) -> np.ndarray:
    """``G G^H / trace`` for a ``dim x rank`` Ginibre matrix ``G``."""
    G = ginibre(rng, dim, dim if rank is None else rank)
    rho = G @ G.conj().T
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def haar_pure(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = ginibre(rng, dim, 1)[:, 0]
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_psd(rng: np.random.Generator, dim: int, rank: Optional[int] = None,
               trace_range: tuple[float, float] = (1e-2, 1e2)) -> np.ndarray:
    """Wishart-type PSD matrix with trace drawn log-uniformly from ``trace_range``."""
    lo, hi = np.log(trace_range[0]), np.log(trace_range[1])
    return np.exp(rng.uniform(lo, hi)) * random_state(rng, dim, rank)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    G = ginibre(rng, dim, dim)
    return 0.5 * (G + G.conj().T)


def diagonal_state(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    p = np.zeros(dim)
    idx = rng.choice(dim, size=rank, replace=False)
    p[idx] = rng.dirichlet(np.ones(rank))
    return np.diag(p).astype(complex)


def block_sizes(dim: int, parts: int) -> list[int]:
    if dim < parts:
        raise InvalidSpec(f"cannot split dim {dim} into {parts} orthogonal blocks")
    base, extra = divmod(dim, parts)
    return [base + (i < extra) for i in range(parts)]


def orthogonal_block_states(rng: np.random.Generator, dim: int, parts: int, rank: int) -> list[np.ndarray]:
    """States living on disjoint diagonal blocks, so ``trace(rho_i rho_j) = 0`` exactly."""
    out = []
    start = 0
    for size in block_sizes(dim, parts):
        rho = np.zeros((dim, dim), dtype=complex)
        rho[start:start + size, start:start + size] = random_state(rng, size, min(rank, size))
        out.append(rho)
        start += size
    return out


def draw_states(rng: np.random.Generator, spec: EnsembleSpec, arity: int) -> tuple[np.ndarray, ...]:
    dim, rank = spec.dim, spec.rank
    if spec.family == "generic_mixed":
        return tuple(random_state(rng, dim, rank) for _ in range(arity))
    if spec.family == "haar_pure":
        return tuple(haar_pure(rng, dim) for _ in range(arity))
    if spec.family == "commuting_diagonal":
        return tuple(diagonal_state(rng, dim, rank) for _ in range(arity))
    return tuple(orthogonal_block_states(rng, dim, arity, rank))


def gen_states(spec: EnsembleSpec, arity: int = 2) -> Iterator[tuple[np.ndarray, ...]]:
    """Yield ``spec.trials`` tuples of ``arity`` density matrices."""
    if arity < 1:
        raise InvalidSpec("arity must be >= 1")
    for index in range(spec.trials):
        yield draw_states(trial_rng(spec.seed, index), spec, arity)
