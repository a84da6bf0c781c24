from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from ...covariance.errors import (
    DimensionMismatch,
    InvalidModel,
    NotHermitian,
    NotPositiveDefinite,
)
from ...covariance.spectral import (
    HermitianMatrix,
    SpectralModel,
    ToeplitzHerm,
    autocov,
    autocov_sequence,
    build_toeplitz,
    density_evaluator,
    esd,
    matrix_inv,
    matrix_inv_sqrt,
    matrix_sqrt,
    spectrum_ratio_bounds,
    szego_reference,
    toeplitz_matvec,
)
from ..utils import random_psd, relative_error


class TestSpectralModel:
    @pytest.mark.parametrize("a", [0.0, 1.0, -0.2, 1.5])
    def test_rejects_exponent_outside_unit_interval(self, a):
        with pytest.raises(InvalidModel):
            SpectralModel.time_domain(a)

    def test_rejects_non_positive_r0(self):
        with pytest.raises(InvalidModel):
            SpectralModel.time_domain(0.5, r0=0.0)

    @pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
    def test_time_domain_lower_bound_positive(self, a):
        assert SpectralModel.time_domain(a).density_lower_bound > 0


class TestAutocov:
    @pytest.mark.parametrize(
        "k, expected",
        [
            (0, 1.0),
            (9, 10**-0.3),
            (-9, 10**-0.3),
        ],
    )
    def test_time_domain_closed_form(self, k, expected):
        assert autocov(SpectralModel.time_domain(0.7), k) == pytest.approx(
            expected, rel=1e-12
        )

    def test_frequency_domain_lag_zero(self):
        value = autocov(SpectralModel.frequency_domain(0.5), 0)
        assert value == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-7)

    def test_frequency_domain_against_quad(self):
        # x = u^(1 / (1 - a)) removes the singularity at the origin
        a, k = 0.3, 5
        power = 1.0 / (1.0 - a)
        expected, _ = integrate.quad(
            lambda u: math.cos(k * u**power) * power,
            0.0,
            math.pi ** (1.0 - a),
            limit=200,
            epsabs=1e-13,
            epsrel=1e-12,
        )
        value = autocov(SpectralModel.frequency_domain(a), k)
        assert value == pytest.approx(expected / math.pi, rel=1e-6, abs=1e-9)

    def test_sequence_agrees_with_pointwise(self):
        model = SpectralModel.frequency_domain(0.4)
        seq = autocov_sequence(model, 6)
        for k in range(6):
            assert seq[k] == pytest.approx(autocov(model, k), rel=1e-12)

    @pytest.mark.parametrize(
        "model",
        [SpectralModel.time_domain(0.5), SpectralModel.frequency_domain(0.5)],
    )
    def test_magnitudes_non_increasing(self, model):
        seq = np.abs(autocov_sequence(model, 40))
        assert np.all(np.diff(seq[1:]) <= 1e-12)

    def test_rejects_empty_sequence(self):
        with pytest.raises(ValueError):
            autocov_sequence(SpectralModel.time_domain(0.5), 0)


class TestBuildToeplitz:
    def test_single_lag(self):
        R = build_toeplitz(SpectralModel.time_domain(0.7), 1)
        assert R.M == 1
        np.testing.assert_allclose(R.first_row, [1.0])

    def test_first_row_closed_form(self):
        R = build_toeplitz(SpectralModel.time_domain(0.5), 3)
        np.testing.assert_allclose(R.first_row, [1.0, 0.7071068, 0.5773503], rtol=1e-7)

    @pytest.mark.parametrize(
        "model",
        [
            SpectralModel.time_domain(0.7),
            SpectralModel.frequency_domain(0.3),
            SpectralModel.white(2.0),
        ],
    )
    def test_two_by_two_spectrum(self, model):
        R = build_toeplitz(model, 2)
        r0, r1 = R.first_row
        np.testing.assert_allclose(R.dense(), [[r0, r1], [r1, r0]])
        np.testing.assert_allclose(esd(R), [r0 - abs(r1), r0 + abs(r1)], rtol=1e-12)

    @pytest.mark.parametrize("a", [0.3, 0.7, 0.9])
    @pytest.mark.parametrize("M", [16, 64, 256])
    def test_min_eigenvalue_above_density_bound(self, a, M):
        model = SpectralModel.time_domain(a)
        assert esd(build_toeplitz(model, M))[0] >= model.density_lower_bound - 1e-8

    def test_complex_row_needs_real_lag_zero(self):
        with pytest.raises(NotHermitian):
            ToeplitzHerm(np.array([1.0 + 1.0j, 0.5]))

    def test_lambda_max_grows_with_m(self):
        model = SpectralModel.time_domain(0.7)
        tops = [esd(build_toeplitz(model, M))[-1] for M in (128, 256, 512)]
        slopes = np.diff(np.log(tops)) / math.log(2)
        assert np.all(slopes > 0.5)
        assert np.all(slopes < 0.9)


class TestToeplitzMatvec:
    def setup_class(self):
        self.rng = np.random.default_rng(7)

    def test_identity_like(self):
        T = ToeplitzHerm(np.array([1.0, 0.0, 0.0, 0.0]))
        v = self.rng.standard_normal(4)
        np.testing.assert_allclose(toeplitz_matvec(T, v), v, atol=1e-12)

    def test_column_extraction(self):
        T = ToeplitzHerm(np.array([1.0, 0.5, 0.25]))
        np.testing.assert_allclose(
            toeplitz_matvec(T, np.array([1.0, 0.0, 0.0])), [1.0, 0.5, 0.25], atol=1e-12
        )

    @pytest.mark.parametrize("M", [4, 16, 64, 257])
    def test_matches_dense_real(self, M):
        T = build_toeplitz(SpectralModel.time_domain(0.6), M)
        v = self.rng.standard_normal(M)
        assert relative_error(toeplitz_matvec(T, v), T.dense() @ v) < 1e-10

    @pytest.mark.parametrize("M", [4, 16, 64, 257])
    def test_matches_dense_complex(self, M):
        row = self.rng.standard_normal(M) + 1j * self.rng.standard_normal(M)
        row[0] = abs(row[0]) + M
        T = ToeplitzHerm(row)
        v = self.rng.standard_normal((M, 3)) + 1j * self.rng.standard_normal((M, 3))
        assert relative_error(T.matvec(v), T.dense() @ v) < 1e-10

    def test_dimension_mismatch(self):
        T = ToeplitzHerm(np.array([1.0, 0.5]))
        with pytest.raises(DimensionMismatch):
            toeplitz_matvec(T, np.ones(3))


class TestHermitianMatrix:
    def setup_class(self):
        self.rng = np.random.default_rng(11)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            HermitianMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatch):
            HermitianMatrix(np.ones((2, 3)))

    def test_reconstruction(self):
        A = random_psd(self.rng, 8)
        w, V = A.eigh()
        assert relative_error((V * w) @ V.conj().T, A.entries) < 1e-8
        assert np.all(np.diff(w) >= 0)

    def test_eig_cache_reused(self):
        A = random_psd(self.rng, 5)
        first = A.eigh()
        assert A.eigh() is first

    def test_esd_sorted(self):
        np.testing.assert_allclose(esd(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])

    def test_esd_of_white_toeplitz(self):
        np.testing.assert_allclose(esd(build_toeplitz(SpectralModel.white(), 6)), 1.0)


class TestMatrixFunctions:
    def setup_class(self):
        self.rng = np.random.default_rng(3)

    def test_identity(self):
        np.testing.assert_allclose(matrix_sqrt(HermitianMatrix(np.eye(4))).entries, np.eye(4))

    def test_diagonal(self):
        root = matrix_sqrt(HermitianMatrix(np.diag([4.0, 9.0])))
        np.testing.assert_allclose(root.entries, np.diag([2.0, 3.0]), atol=1e-12)

    def test_square_round_trip(self):
        A = random_psd(self.rng, 8)
        B = matrix_sqrt(A).entries
        assert relative_error(B @ B, A.entries) < 1e-8

    def test_inverse_square_root(self):
        A = random_psd(self.rng, 8)
        product = matrix_inv_sqrt(A).entries @ matrix_sqrt(A).entries
        assert relative_error(product, np.eye(8)) < 1e-8

    def test_inverse(self):
        A = random_psd(self.rng, 6)
        assert relative_error(matrix_inv(A).entries @ A.entries, np.eye(6)) < 1e-8

    def test_singular_inverse_raises(self):
        with pytest.raises(NotPositiveDefinite):
            matrix_inv(HermitianMatrix(np.diag([1.0, 0.0])))

    def test_indefinite_sqrt_raises(self):
        with pytest.raises(NotPositiveDefinite):
            matrix_sqrt(HermitianMatrix(np.diag([1.0, -1.0])))

    def test_tiny_negative_clamped(self):
        root = matrix_sqrt(HermitianMatrix(np.diag([1.0, -1e-14])))
        np.testing.assert_allclose(root.entries, np.diag([1.0, 0.0]), atol=1e-12)


class TestSzego:
    def test_flat_density(self):
        ref = szego_reference(SpectralModel.white(), 16, 64)
        np.testing.assert_allclose(ref.samples, 1.0)
        np.testing.assert_allclose(ref.eigenvalues, 1.0)
        assert ref.ks_distance == 0.0

    def test_grid_must_cover_dimension(self):
        with pytest.raises(ValueError):
            szego_reference(SpectralModel.white(), 16, 8)

    def test_frequency_model_close_to_reference(self):
        ref = szego_reference(SpectralModel.frequency_domain(0.3), 256, 4096)
        assert ref.ks_distance < 0.08

    @pytest.mark.parametrize(
        "model", [SpectralModel.frequency_domain(0.3), SpectralModel.time_domain(0.7)]
    )
    def test_ks_distance_shrinks_with_dimension(self, model):
        small = szego_reference(model, 64, 4096).ks_distance
        large = szego_reference(model, 512, 4096).ks_distance
        assert large < small

    def test_quantiles_stable_under_refinement(self):
        model = SpectralModel.frequency_domain(0.3)
        levels = np.linspace(0.05, 0.95, 19)
        coarse = szego_reference(model, 32, 4096).quantiles(levels)
        fine = szego_reference(model, 32, 8192).quantiles(levels)
        assert np.max(np.abs(coarse - fine)) < 1e-3

    def test_time_domain_density_non_negative(self):
        f = density_evaluator(SpectralModel.time_domain(0.7), 128)
        thetas = np.linspace(-math.pi, math.pi, 1024)
        assert np.all(f(thetas) >= -1e-12)

    def test_frequency_density_wraps(self):
        f = density_evaluator(SpectralModel.frequency_domain(0.5))
        assert f(np.array([math.pi / 2]))[0] == pytest.approx((math.pi / 2) ** -0.5)
        assert f(np.array([2 * math.pi + 0.5]))[0] == pytest.approx(0.5**-0.5)

    def test_fejer_order_must_be_positive(self):
        with pytest.raises(ValueError):
            density_evaluator(SpectralModel.time_domain(0.5), 0)

    @pytest.mark.parametrize("a", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("k", [0, 1, 3, 10])
    def test_time_domain_density_reproduces_lags(self, a, k):
        model = SpectralModel.time_domain(a)
        f = density_evaluator(model)
        value, _ = integrate.quad(
            lambda x: f(np.array([x]))[0] * math.cos(k * x), 0.0, math.pi, limit=400
        )
        assert value / math.pi == pytest.approx(autocov(model, k), rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("a", [0.3, 0.7])
    def test_time_domain_density_pole(self, a):
        f = density_evaluator(SpectralModel.time_domain(a))
        x = 1e-10
        limit = 2.0 * math.gamma(a) * math.cos(0.5 * math.pi * a)
        assert f(np.array([x]))[0] * x**a == pytest.approx(limit, rel=1e-2)
        assert math.isinf(f(np.array([0.0]))[0])

    def test_time_domain_density_is_even_and_periodic(self):
        f = density_evaluator(SpectralModel.time_domain(0.6))
        thetas = np.array([0.3, 1.7, math.pi])
        np.testing.assert_allclose(f(-thetas), f(thetas))
        np.testing.assert_allclose(f(thetas + 2 * math.pi), f(thetas))


class TestSpectrumRatioBounds:
    def setup_class(self):
        self.model = SpectralModel.frequency_domain(0.5)
        self.f = staticmethod(density_evaluator(self.model))

    def test_same_matrix(self):
        T = build_toeplitz(self.model, 32)
        lo, hi, ok = spectrum_ratio_bounds(T, T, self.f, self.f)
        assert lo == pytest.approx(1.0)
        assert hi == pytest.approx(1.0)
        assert ok

    def test_scaled_matrix(self):
        T = build_toeplitz(self.model, 32)
        lo, hi, ok = spectrum_ratio_bounds(
            T.scaled(2.0), T, lambda t: 2.0 * self.f(t), self.f
        )
        assert (lo, hi) == pytest.approx((2.0, 2.0))
        assert ok

    @pytest.mark.parametrize("M", [16, 64, 256])
    def test_distinct_exponents(self, M):
        other = SpectralModel.frequency_domain(0.3)
        lo, hi, ok = spectrum_ratio_bounds(
            build_toeplitz(other, M),
            build_toeplitz(self.model, M),
            density_evaluator(other),
            self.f,
        )
        assert lo < 1.0 < hi
        assert ok

    @pytest.mark.parametrize("M", [16, 64, 256])
    @pytest.mark.parametrize(
        "first, second",
        [
            (SpectralModel.time_domain(0.3), SpectralModel.time_domain(0.7)),
            (SpectralModel.time_domain(0.7), SpectralModel.time_domain(0.3)),
            (SpectralModel.time_domain(0.5), SpectralModel.frequency_domain(0.5)),
            (SpectralModel.frequency_domain(0.3), SpectralModel.time_domain(0.9)),
            (SpectralModel.white(), SpectralModel.time_domain(0.7)),
        ],
    )
    def test_model_pairs(self, first, second, M):
        lo, hi, ok = spectrum_ratio_bounds(
            build_toeplitz(first, M),
            build_toeplitz(second, M),
            density_evaluator(first),
            density_evaluator(second),
            exponents=(first.singularity_exponent, second.singularity_exponent),
        )
        assert ok
        if first.singularity_exponent < second.singularity_exponent:
            assert lo == 0.0
        if first.singularity_exponent > second.singularity_exponent:
            assert hi == math.inf

    @pytest.mark.parametrize("M", [16, 64, 256])
    def test_near_zero_ladder_without_exponents(self, M):
        weak, strong = SpectralModel.time_domain(0.3), SpectralModel.time_domain(0.7)
        lo, hi, _ = spectrum_ratio_bounds(
            build_toeplitz(weak, M),
            build_toeplitz(strong, M),
            density_evaluator(weak),
            density_evaluator(strong),
        )
        # the near-zero ladder still drives the sampled infimum far below one
        assert 0.0 < lo < 1e-2
        assert hi > 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            spectrum_ratio_bounds(
                build_toeplitz(self.model, 4),
                build_toeplitz(self.model, 5),
                self.f,
                self.f,
            )

    def test_singular_denominator(self):
        T = build_toeplitz(self.model, 4)
        with pytest.raises(NotPositiveDefinite):
            spectrum_ratio_bounds(T, ToeplitzHerm(np.zeros(4)), self.f, self.f)
