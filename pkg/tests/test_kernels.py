import json
import math

import numpy as np
import pytest

from pggp import (
    InvalidArgumentError,
    KernelSpec,
    NumericalError,
    RngStream,
    factorize,
    kernel_matrix,
    mvn_sample,
)
from pggp.kernels import kernel_diag


def random_points(n, d, seed=0):
    return np.random.default_rng(seed).normal(size=(n, d))


class TestKernelMatrix:
    def test_rbf_self_diagonal_is_output_scale_squared_plus_jitter(self):
        spec = KernelSpec(family="rbf", length_scale=1.0, output_scale=8.0)
        x = random_points(5, 3)
        k = kernel_matrix(x, spec=spec)
        assert np.allclose(np.diag(k), 64.0 + spec.jitter)

    def test_rbf_hand_value_at_distance_sqrt2(self):
        spec = KernelSpec(family="rbf", length_scale=1.0, output_scale=1.0, jitter=0.0)
        a = np.array([[0.0, 0.0]])
        b = np.array([[1.0, 1.0]])
        k = kernel_matrix(a, b, spec)
        assert k[0, 0] == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_rbf_underflows_to_zero_far_away(self):
        spec = KernelSpec(family="rbf", length_scale=1.0, output_scale=1.0)
        k = kernel_matrix(np.array([[0.0]]), np.array([[100.0]]), spec)
        assert k[0, 0] == 0.0

    def test_linear_is_scaled_dot_product(self):
        spec = KernelSpec(family="linear", length_scale=1.0, output_scale=2.0, jitter=0.0)
        a = random_points(4, 3, seed=1)
        b = random_points(6, 3, seed=2)
        assert np.allclose(kernel_matrix(a, b, spec), 4.0 * (a @ b.T))

    def test_matern52_at_zero_distance(self):
        spec = KernelSpec(family="matern52", length_scale=0.7, output_scale=3.0, jitter=0.0)
        x = np.array([[1.0, 2.0]])
        assert kernel_matrix(x, x.copy(), spec)[0, 0] == pytest.approx(9.0, rel=1e-12)

    def test_rbf_entries_bounded_by_output_scale_squared(self):
        spec = KernelSpec(family="rbf", length_scale=0.5, output_scale=3.0, jitter=0.0)
        k = kernel_matrix(random_points(20, 4, seed=3), random_points(15, 4, seed=4), spec)
        assert np.all(k > 0) and np.all(k <= 9.0 + 1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(InvalidArgumentError):
            kernel_matrix(random_points(3, 2), random_points(3, 4), KernelSpec())

    @pytest.mark.parametrize("family", ["rbf", "linear", "matern52"])
    def test_self_kernel_symmetric_and_factorizable(self, family):
        spec = KernelSpec(family=family, length_scale=1.3, output_scale=2.0)
        x = random_points(30, 3, seed=5)
        k = kernel_matrix(x, spec=spec)
        assert np.allclose(k, k.T)
        factorize(k)  # must not raise

    def test_kernel_diag_matches_self_kernel_without_jitter(self):
        x = random_points(7, 3, seed=8)
        for family in ("rbf", "linear", "matern52"):
            spec = KernelSpec(family=family, length_scale=1.1, output_scale=2.5, jitter=0.0)
            assert np.allclose(kernel_diag(x, spec), np.diag(kernel_matrix(x, spec=spec)))


class TestKernelSpec:
    def test_default_jitter_scales_with_output(self):
        assert KernelSpec(output_scale=8.0).jitter == pytest.approx(64e-6)

    def test_json_round_trip(self):
        spec = KernelSpec(family="matern52", length_scale=0.3, output_scale=5.0, jitter=1e-7)
        again = KernelSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
        assert again == spec

    @pytest.mark.parametrize("kw", [
        {"length_scale": 0.0}, {"length_scale": -1.0}, {"output_scale": 0.0},
        {"jitter": -1e-9}, {"family": "periodic"},
    ])
    def test_invalid_spec_rejected(self, kw):
        with pytest.raises(InvalidArgumentError):
            KernelSpec(**kw)


class TestFactorize:
    def test_identity_with_zero_jitter(self):
        psd = factorize(np.eye(3), jitter=0.0)
        assert np.array_equal(psd.factor, np.eye(3))
        assert psd.jitter_used == 0.0

    def test_diagonal_case(self):
        psd = factorize(np.diag([4.0, 9.0]), jitter=0.0)
        assert np.allclose(psd.factor, np.diag([2.0, 3.0]))

    def test_rank_deficient_all_ones(self):
        k = np.ones((3, 3))
        psd = factorize(k, jitter=1e-6)
        recon = psd.factor @ psd.factor.T
        assert np.max(np.abs(recon - (k + 1e-6 * np.eye(3)))) < 1e-9

    def test_round_trip_relative_frobenius(self):
        a = random_points(12, 12, seed=6)
        k = a @ a.T + 0.5 * np.eye(12)
        psd = factorize(k)
        recon = psd.factor @ psd.factor.T
        assert np.linalg.norm(recon - psd.matrix) / np.linalg.norm(psd.matrix) < 1e-8

    def test_jitter_ladder_escalates(self):
        k = np.ones((3, 3))  # singular; needs escalation from jitter 0
        psd = factorize(k, jitter=0.0)
        assert psd.jitter_used > 0.0

    def test_not_pd_reports_ladder(self):
        with pytest.raises(NumericalError, match="jitter ladder"):
            factorize(-np.eye(2), jitter=1e-8)

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidArgumentError):
            factorize(np.array([[1.0, 0.5], [0.1, 1.0]]))

    def test_solve_matches_direct_inverse(self):
        a = random_points(8, 8, seed=7)
        k = a @ a.T + np.eye(8)
        psd = factorize(k)
        rhs = np.arange(8.0)
        assert np.allclose(psd.solve(rhs), np.linalg.solve(psd.matrix, rhs))


class TestMvnSample:
    def test_zero_factor_returns_mean(self):
        mean = np.array([1.0, -2.0, 3.0])
        from pggp.kernels import PsdMatrix
        zero = PsdMatrix(matrix=np.zeros((3, 3)), factor=np.zeros((3, 3)))
        assert np.array_equal(mvn_sample(mean, zero, RngStream(0, 0)), mean)

    def test_sample_covariance(self):
        k = np.array([[1.0, 0.5], [0.5, 1.0]])
        psd = factorize(k)
        rng = RngStream(21, 0)
        draws = np.array([mvn_sample(np.zeros(2), psd, rng) for _ in range(10_000)])
        emp = np.cov(draws.T)
        assert np.max(np.abs(emp - k)) < 0.05

    def test_fixed_stream_repeats(self):
        psd = factorize(np.eye(4))
        a = mvn_sample(np.zeros(4), psd, RngStream(3, 5))
        b = mvn_sample(np.zeros(4), psd, RngStream(3, 5))
        assert np.array_equal(a, b)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(InvalidArgumentError):
            mvn_sample(np.zeros(3), factorize(np.eye(2)), RngStream(0, 0))
