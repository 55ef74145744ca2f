import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import central_difference, full_rank_state, hermitian_direction, logm_h
from tre_kit.ensembles import random_hermitian, random_psd, random_state
from tre_kit.errors import SupportMismatch
from tre_kit.frechet import (
    DividedDifferenceKernel,
    log_divided_difference,
    log_second_divided_difference,
    quadrature_r_map,
    quadrature_t_map,
    r_map,
    t_map,
)
from tre_kit.operators import support_projector

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 5)


def _inner(X, Y):
    return np.trace(X @ Y).real


class TestDividedDifferences:
    def test_confluent_limit(self):
        x = np.array([2.0])
        assert log_divided_difference(x, x, 1e-7)[0] == pytest.approx(0.5, rel=1e-15)

    @pytest.mark.parametrize("gap", [1e-3, 1e-6, 1e-8, 1e-10])
    def test_continuous_across_confluence(self, gap):
        x, y = np.array([1.0 + gap]), np.array([1.0])
        # series (log x - log y)/(x - y) = 1 - g/2 + g^2/3 - ...
        expected = 1.0 - gap / 2.0 + gap**2 / 3.0
        assert log_divided_difference(x, y, 1e-7)[0] == pytest.approx(expected, rel=1e-9)

    def test_second_order_fully_confluent(self):
        x = np.array([3.0])
        assert log_second_divided_difference(x, x, x, 1e-7)[0] == pytest.approx(-1.0 / 18.0)

    def test_second_order_distinct(self):
        x, y, z = 1.0, 2.0, 4.0
        first_xy = (np.log(y) - np.log(x)) / (y - x)
        first_yz = (np.log(z) - np.log(y)) / (z - y)
        expected = (first_yz - first_xy) / (z - x)
        for args in ((x, y, z), (z, x, y), (y, z, x)):
            got = log_second_divided_difference(*(np.array([v]) for v in args), 1e-7)[0]
            assert got == pytest.approx(expected, rel=1e-13)

    def test_second_order_one_sided_confluence(self):
        # log[x, x, z] = (1/x - log[x, z]) / (x - z)
        x, z = 2.0, 5.0
        expected = (1.0 / x - (np.log(z) - np.log(x)) / (z - x)) / (x - z)
        got = log_second_divided_difference(np.array([x]), np.array([x]), np.array([z]), 1e-7)[0]
        assert got == pytest.approx(expected, rel=1e-12)


class TestTMap:
    def test_identity_base(self):
        D = np.diag([1.0, -1.0])
        np.testing.assert_allclose(t_map(np.eye(2), D), D, atol=1e-10)

    def test_identity_base_general(self, rng):
        D = random_hermitian(rng, 4)
        np.testing.assert_allclose(t_map(np.eye(4), D), D, atol=1e-10)

    def test_commuting_pair(self):
        np.testing.assert_allclose(t_map(np.diag([1.0, 2.0]), np.eye(2)), np.diag([1.0, 0.5]), atol=1e-12)

    def test_self_gives_identity(self, rng):
        A = random_psd(rng, 4)
        np.testing.assert_allclose(t_map(A, A), np.eye(4), atol=1e-10)

    @pytest.mark.parametrize("rank", [1, 2, 3])
    def test_self_gives_support_projector(self, rng, rank):
        rho = random_state(rng, 5, rank)
        np.testing.assert_allclose(t_map(rho, rho), support_projector(rho), atol=1e-9)

    def test_quadrature_oracle(self, rng):
        for dim in (2, 3, 6):
            A = random_psd(rng, dim) + 1e-2 * np.eye(dim)
            D = random_hermitian(rng, dim)
            ref = quadrature_t_map(A, D)
            scale = max(1.0, np.abs(ref).max())
            assert np.abs(t_map(A, D) - ref).max() <= 1e-8 * scale

    def test_finite_difference(self, rng):
        A = full_rank_state(rng, 4, floor=0.2 * 4)
        D = hermitian_direction(rng, 4)
        fd = central_difference(logm_h, A, D, 1e-5)
        np.testing.assert_allclose(t_map(A, D), fd, atol=1e-6)

    def test_leak_outside_support_raises(self):
        A = np.diag([1.0, 0.0])
        with pytest.raises(SupportMismatch):
            t_map(A, np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_quadrature_rejects_singular(self):
        with pytest.raises(SupportMismatch):
            quadrature_t_map(np.diag([1.0, 0.0]), np.eye(2))

    @given(dims, seeds)
    def test_self_adjoint(self, dim, seed):
        rng = np.random.default_rng(seed)
        A = random_psd(rng, dim)
        X, Y = random_hermitian(rng, dim), random_hermitian(rng, dim)
        lhs, rhs = _inner(Y, t_map(A, X)), _inner(X, t_map(A, Y))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    @given(dims, seeds)
    def test_positive(self, dim, seed):
        rng = np.random.default_rng(seed)
        A = random_psd(rng, dim)
        X = random_hermitian(rng, dim)
        assert _inner(X, t_map(A, X)) >= -1e-12

    @given(dims, seeds)
    def test_order_preserving_in_direction(self, dim, seed):
        # X <= Y implies T_A(Y) - T_A(X) >= 0
        rng = np.random.default_rng(seed)
        A = random_psd(rng, dim)
        X = random_hermitian(rng, dim)
        Y = X + random_psd(rng, dim)
        gap = t_map(A, Y) - t_map(A, X)
        assert np.linalg.eigvalsh(gap)[0] >= -1e-10 * max(1.0, np.abs(gap).max())

    @given(dims, seeds)
    def test_order_reversing(self, dim, seed):
        # A <= B implies trace X T_A(X) >= trace X T_B(X)
        rng = np.random.default_rng(seed)
        A = random_psd(rng, dim)
        B = A + random_psd(rng, dim)
        X = random_hermitian(rng, dim)
        assert _inner(X, t_map(A, X)) >= _inner(X, t_map(B, X)) - 1e-9 * abs(_inner(X, t_map(A, X)))

    @given(dims, seeds)
    def test_jointly_convex(self, dim, seed):
        rng = np.random.default_rng(seed)
        A1, A2 = random_psd(rng, dim), random_psd(rng, dim)
        X1, X2 = random_hermitian(rng, dim), random_hermitian(rng, dim)
        mid = _inner(0.5 * (X1 + X2), t_map(0.5 * (A1 + A2), 0.5 * (X1 + X2)))
        ends = 0.5 * (_inner(X1, t_map(A1, X1)) + _inner(X2, t_map(A2, X2)))
        assert ends - mid >= -1e-9 * max(1.0, ends)

    def test_kernel_reuse_matches(self, rng):
        A = random_psd(rng, 4)
        kernel = DividedDifferenceKernel.from_matrix(A)
        D = random_hermitian(rng, 4)
        np.testing.assert_allclose(kernel.t(D), t_map(A, D), atol=1e-14)


class TestRMap:
    @pytest.mark.parametrize("x,d", [(2.0, 1.0), (0.3, -0.7), (5.0, 2.5)])
    def test_scalar(self, x, d):
        got = r_map(np.array([[x]]), np.array([[d]]))[0, 0]
        assert got.real == pytest.approx(d**2 / x**2, abs=1e-10)

    def test_commuting_pair(self):
        np.testing.assert_allclose(r_map(np.diag([1.0, 2.0]), np.eye(2)), np.diag([1.0, 0.25]), atol=1e-12)

    def test_self_gives_identity(self, rng):
        A = random_psd(rng, 4)
        np.testing.assert_allclose(r_map(A, A), np.eye(4), atol=1e-10)

    def test_quadrature_oracle(self, rng):
        for dim in (2, 3, 6):
            A = random_psd(rng, dim) + 1e-2 * np.eye(dim)
            D = random_hermitian(rng, dim)
            ref = quadrature_r_map(A, D)
            scale = max(1.0, np.abs(ref).max())
            assert np.abs(r_map(A, D) - ref).max() <= 1e-7 * scale

    def test_finite_difference(self, rng):
        A = full_rank_state(rng, 3, floor=0.2 * 3)
        D = hermitian_direction(rng, 3)
        h = 1e-4
        second = (logm_h(A + h * D) - 2.0 * logm_h(A) + logm_h(A - h * D)) / h**2
        np.testing.assert_allclose(r_map(A, D), -second, atol=1e-4)

    @given(dims, seeds)
    def test_positive_semidefinite(self, dim, seed):
        rng = np.random.default_rng(seed)
        A = random_psd(rng, dim)
        R = r_map(A, random_hermitian(rng, dim))
        np.testing.assert_allclose(R, R.conj().T, atol=1e-9 * max(1.0, np.abs(R).max()))
        assert np.linalg.eigvalsh(R)[0] >= -1e-9 * max(1.0, np.abs(R).max())
