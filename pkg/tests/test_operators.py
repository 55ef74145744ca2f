from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import full_rank_state
from tre_kit.errors import (
    DimensionMismatch,
    NonHermitianInput,
    NotAState,
    NotPositiveSemidefinite,
)
from tre_kit.divergences import tre
from tre_kit.ensembles import haar_pure, random_hermitian, random_state
from tre_kit.operators import (
    SpectralDecomposition,
    ToleranceConfig,
    as_psd,
    as_state,
    effective_rank,
    log_on_support,
    positive_part,
    quadrature_log,
    spectral_decompose,
    support_projector,
    trace_distance,
)


class TestValidation:
    def test_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            as_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_negative_eigenvalue(self):
        with pytest.raises(NotPositiveSemidefinite):
            as_psd(np.diag([1.0, -0.1]))

    def test_trace_not_one(self):
        with pytest.raises(NotAState):
            as_state(np.diag([0.5, 0.6]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            tre(0.5, np.eye(2) / 2, np.eye(3) / 3)

    def test_non_square(self):
        with pytest.raises(ValueError):
            as_psd(np.ones((2, 3)))

    @pytest.mark.parametrize("field", ["rank_tol", "confluence_tol", "hermiticity_tol"])
    @pytest.mark.parametrize("bad", [0.0, -1e-3, 1.0, 2.0])
    def test_tolerance_range(self, field, bad):
        with pytest.raises(ValueError):
            ToleranceConfig(**{field: bad})


class TestSupportProjector:
    def test_rank_two_diagonal(self):
        P = support_projector(np.diag([0.5, 0.5, 0.0]))
        np.testing.assert_allclose(P, np.diag([1.0, 1.0, 0.0]), atol=1e-12)

    def test_full_rank_is_identity(self, rng):
        np.testing.assert_allclose(support_projector(full_rank_state(rng, 4)), np.eye(4), atol=1e-12)

    def test_pure_state_is_itself(self, rng):
        psi = haar_pure(rng, 4)
        P = support_projector(psi)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(P @ psi, psi, atol=1e-12)
        np.testing.assert_allclose(P, psi, atol=1e-12)


class TestPositivePart:
    def test_diagonal(self):
        np.testing.assert_allclose(positive_part(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]))

    def test_psd_unchanged(self, rng):
        X = random_state(rng, 3)
        np.testing.assert_allclose(positive_part(X), X, atol=1e-12)

    def test_variational_maximum(self, rng):
        # trace X_+ is the largest trace XP over sums of eigenprojectors
        X = random_hermitian(rng, 4)
        w, V = np.linalg.eigh(X)
        best = max(
            np.trace(X @ (V[:, list(idx)] @ V[:, list(idx)].conj().T)).real
            for k in range(5) for idx in combinations(range(4), k)
        )
        assert np.trace(positive_part(X)).real == pytest.approx(best, abs=1e-12)


class TestTraceDistance:
    def test_self(self, rng):
        rho = random_state(rng, 3)
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)

    def test_orthogonal_pure(self):
        assert trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == pytest.approx(1.0)

    def test_diagonal(self):
        assert trace_distance(np.diag([0.7, 0.3]), np.diag([0.4, 0.6])) == pytest.approx(0.3, abs=1e-14)

    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    def test_metric_properties(self, dim, seed):
        rng = np.random.default_rng(seed)
        r, s, u = (random_state(rng, dim) for _ in range(3))
        d = trace_distance(r, s)
        assert 0.0 <= d <= 1.0
        assert d == pytest.approx(trace_distance(s, r), abs=1e-12)
        assert d <= trace_distance(r, u) + trace_distance(u, s) + 1e-12


class TestLogOnSupport:
    def test_identity(self):
        np.testing.assert_allclose(log_on_support(np.eye(3)), np.zeros((3, 3)), atol=1e-15)

    def test_kernel_zeroed(self):
        np.testing.assert_allclose(log_on_support(np.diag([np.e, 1.0, 0.0])), np.diag([1.0, 0.0, 0.0]), atol=1e-14)

    def test_quadrature_oracle(self, rng):
        for dim in (2, 3, 5):
            X = 3.0 * full_rank_state(rng, dim)
            np.testing.assert_allclose(log_on_support(X), quadrature_log(X), atol=1e-8)


class TestSpectralDecomposition:
    def test_reconstruct(self, rng):
        X = random_hermitian(rng, 4)
        dec = spectral_decompose(X)
        np.testing.assert_allclose(dec.reconstruct(), X, atol=1e-12)
        assert dec.dim == 4

    def test_passthrough(self, rng):
        dec = spectral_decompose(random_state(rng, 3))
        assert spectral_decompose(dec) is dec
        assert isinstance(dec, SpectralDecomposition)

    def test_effective_rank(self, rng):
        assert effective_rank(random_state(rng, 5, 2)) == 2
        assert effective_rank(haar_pure(rng, 4)) == 1
