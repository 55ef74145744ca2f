import os

import numpy as np
import pytest
from hypothesis import settings

from tre_kit.ensembles import random_psd, random_state, trial_rng

settings.register_profile("tre", max_examples=40, deadline=None, derandomize=True)
settings.register_profile("soak", max_examples=1500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "tre"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def full_rank_state(rng, dim, floor=0.05):
    """Random state with every eigenvalue at least ``floor / dim``."""
    rho = random_state(rng, dim)
    return (1.0 - floor) * rho + floor * np.eye(dim) / dim


def hermitian_direction(rng, dim):
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = G + G.conj().T
    return H / np.linalg.norm(H)


def logm_h(X):
    w, V = np.linalg.eigh(X)
    return (V * np.log(w)) @ V.conj().T


def central_difference(fn, X, D, h):
    return (fn(X + h * D) - fn(X - h * D)) / (2.0 * h)


def seeded_states(seed, index, dim, count, rank=None):
    rng = trial_rng(seed, index)
    return [random_state(rng, dim, rank) for _ in range(count)]


def seeded_psd(seed, index, dim, count, rank=None):
    rng = trial_rng(seed, index)
    return [random_psd(rng, dim, rank) for _ in range(count)]


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str, seconds: float) -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail}; {seconds:.1f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
