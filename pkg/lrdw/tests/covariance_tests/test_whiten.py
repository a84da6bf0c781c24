from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ...covariance.errors import (
    DimensionMismatch,
    EmptySignal,
    NoDetection,
    NonPositiveEigenvalue,
    NotPositiveDefinite,
    SubcriticalSpike,
)
from ...covariance.estimators import sample_cov, toeplitzify
from ...covariance.spectral import (
    HermitianMatrix,
    SpectralModel,
    build_toeplitz,
    matrix_inv,
    matrix_inv_sqrt,
    matrix_sqrt,
)
from ...covariance.synth import (
    ColumnCovariance,
    NoiseKind,
    NoiseSpec,
    assemble_X,
    draw_data_matrix,
    sample_noise,
)
from ...covariance.whiten import (
    Gammas,
    WhitenKind,
    calibrate_gammas,
    detect_p,
    detect_p_single,
    dual_cov,
    eigvec_alignment,
    estimate_alphas,
    estimate_sigma,
    fix_phase,
    ideal_cov,
    mp_atom,
    mp_density,
    mp_edges,
    pca_compress,
    report_spikes,
    spike_limit,
    whiten_data,
    whitened_cov,
)
from ..utils import thresholds

GAMMAS = Gammas(1.04, 1.03, 1.02)
SPIKED = [10.0, 5.0, 1.01, 1.0, 0.99, 0.98, 0.97]


def _rows(a: float, M: int):
    R = build_toeplitz(SpectralModel.time_domain(a), M)
    return R, matrix_sqrt(R.to_hermitian())


class TestMarcenkoPastur:
    def test_edges(self):
        assert mp_edges(0.25) == pytest.approx((0.25, 2.25))
        assert mp_edges(1.0) == pytest.approx((0.0, 4.0))
        with pytest.raises(ValueError):
            mp_edges(0.0)

    @pytest.mark.parametrize("c", [0.25, 0.6, 1.0, 2.0])
    def test_total_mass(self, c):
        lower, upper = mp_edges(c)
        mass, _ = integrate.quad(lambda x: mp_density(c, x), lower, upper, limit=200)
        assert mass + mp_atom(c) == pytest.approx(1.0, abs=1e-6)

    def test_density_vanishes_outside_support(self):
        np.testing.assert_array_equal(mp_density(0.25, [0.1, 2.5, -1.0]), 0.0)
        assert isinstance(mp_density(0.25, 1.0), float)

    def test_atom(self):
        assert mp_atom(0.5) == 0.0
        assert mp_atom(4.0) == pytest.approx(0.75)


class TestSpikeLimit:
    def test_value(self):
        assert spike_limit(4.0, 0.25) == pytest.approx(4.0 + 0.25 * 4.0 / 3.0)
        assert spike_limit(4.0, 0.25, sigma2=2.0) == pytest.approx(
            2.0 * (4.0 + 1.0 / 3.0)
        )

    @pytest.mark.parametrize("alpha", [1.2, 1.5])
    def test_subcritical(self, alpha):
        with pytest.raises(SubcriticalSpike):
            spike_limit(alpha, 0.25)


class TestDetection:
    def test_finds_gap(self):
        assert detect_p(SPIKED, GAMMAS) == 2
        assert detect_p_single(SPIKED, GAMMAS.g1) == 2

    def test_no_spikes(self):
        assert detect_p([1.01, 1.0, 0.99, 0.98, 0.97], GAMMAS) == 0

    def test_k_max_limits_search(self):
        with pytest.raises(NoDetection):
            detect_p(SPIKED, GAMMAS, k_max=1)

    def test_no_gap_closes(self):
        with pytest.raises(NoDetection):
            detect_p([16.0, 8.0, 4.0, 2.0, 1.0], GAMMAS)

    def test_non_positive(self):
        with pytest.raises(NonPositiveEigenvalue):
            detect_p([3.0, 2.0, 1.0, 0.0], GAMMAS)

    @pytest.mark.parametrize(
        "eigs", [[1.0, 2.0, 0.5, 0.2], [3.0, 2.0, 1.0], [[3.0, 2.0], [1.0, 0.5]]]
    )
    def test_malformed(self, eigs):
        with pytest.raises(ValueError):
            detect_p(eigs, GAMMAS)

    @given(
        values=st.lists(
            st.floats(0.01, 100.0, allow_nan=False), min_size=4, max_size=30
        ),
        e=st.integers(-20, 20),
    )
    @settings(max_examples=60, deadline=None)
    def test_scale_invariance(self, values, e):
        eigs = np.sort(np.asarray(values))[::-1]
        t = 2.0**e

        def outcome(v):
            try:
                return detect_p(v, GAMMAS)
            except NoDetection:
                return None

        assert outcome(eigs) == outcome(t * eigs)


class TestEstimation:
    def test_sigma(self):
        assert estimate_sigma([9.0, 4.0, 1.0], 1, 0.25) == pytest.approx(2.0 / 1.5)
        with pytest.raises(IndexError):
            estimate_sigma([9.0, 4.0, 1.0], 3, 0.25)

    @given(
        alpha_offset=st.floats(0.01, 50.0),
        c=st.floats(0.05, 2.0),
        sigma=st.floats(0.1, 10.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_alpha_round_trip(self, alpha_offset, c, sigma):
        alpha = 1.0 + math.sqrt(c) + alpha_offset
        lam = spike_limit(alpha, c, sigma**2)
        estimate = estimate_alphas([lam], 1, sigma, c)
        assert estimate.values[0] == pytest.approx(alpha, rel=1e-7)
        assert estimate.clamped == (False,)

    def test_clamped_below_edge(self):
        estimate = estimate_alphas([1.0], 1, 1.0, 0.25)
        assert estimate.values == (1.5,)
        assert estimate.clamped == (True,)

    @pytest.mark.parametrize("lam", [0.1, 0.2])
    def test_clamped_when_root_falls_below_edge(self, lam):
        # below (1 - sqrt(c))^2 the discriminant is positive but the root is under the edge
        estimate = estimate_alphas([lam], 1, 1.0, 0.25)
        assert estimate.values == (1.5,)
        assert estimate.clamped == (True,)

    def test_edge_eigenvalue_is_not_clamped(self):
        estimate = estimate_alphas([20.0, 2.25], 2, 1.0, 0.25)
        assert estimate.values[1] == pytest.approx(1.5)
        assert estimate.clamped == (False, False)

    def test_report(self):
        report = report_spikes(SPIKED, GAMMAS, 0.25)
        assert report.p_hat == 2
        assert report.sigma_hat == pytest.approx(math.sqrt(1.01) / 1.5)
        assert len(report.alpha_hats) == 2
        assert report.alpha_hats[0] > report.alpha_hats[1]
        assert report.gammas == GAMMAS

    @pytest.mark.parametrize("e", [-3, 2, 7])
    def test_report_scale_invariance(self, e):
        t = 2.0**e
        base = report_spikes(SPIKED, GAMMAS, 0.25)
        scaled = report_spikes(np.asarray(SPIKED) * t, GAMMAS, 0.25)
        assert scaled.p_hat == base.p_hat
        assert scaled.sigma_hat == pytest.approx(base.sigma_hat * math.sqrt(t))
        assert scaled.alpha_hats == pytest.approx(base.alpha_hats)


class TestWhitening:
    def setup_class(self):
        self.R, self.Rsqrt = _rows(0.7, 24)
        self.spec = NoiseSpec(NoiseKind.GAUSSIAN_COMPLEX, 3)

    def test_oracle_whitening(self):
        Z = sample_noise(self.spec, 24, 10)
        X = assemble_X(self.Rsqrt, Z, ColumnCovariance.identity(10))
        Sw = whitened_cov(X, matrix_inv(self.R.to_hermitian()), WhitenKind.IDEAL)
        np.testing.assert_allclose(Sw.entries.entries, Z.conj().T @ Z / 24, atol=1e-9)
        assert Sw.c == pytest.approx(10 / 24)
        assert Sw.dim == 10

    def test_ideal_matches_known_rows(self):
        C = ColumnCovariance(alphas=(6.0, 3.0), N=10)
        Z, X = draw_data_matrix(self.Rsqrt, self.spec, C, 1)
        oracle = whitened_cov(X, matrix_inv(self.R.to_hermitian()))
        np.testing.assert_allclose(
            ideal_cov(Z, C).eigenvalues(), oracle.eigenvalues(), rtol=1e-8
        )

    def test_eigenvalues_descending(self):
        Z = sample_noise(self.spec, 24, 10, 2)
        X = assemble_X(self.Rsqrt, Z, ColumnCovariance.identity(10))
        Sw, estimate = whiten_data(X, biased=True)
        values = Sw.eigenvalues()
        assert np.all(np.diff(values) <= 0)
        np.testing.assert_allclose(Sw.top_eigenvalues(3), values[:3], rtol=1e-10)
        assert Sw.source is WhitenKind.BIASED
        assert estimate.biased

    def test_rejects_indefinite_inverse(self):
        with pytest.raises(NotPositiveDefinite):
            whitened_cov(np.ones((2, 3)), HermitianMatrix(np.diag([1.0, -1.0])))

    def test_rejects_shape(self):
        with pytest.raises(DimensionMismatch):
            whitened_cov(np.ones((3, 2)), HermitianMatrix(np.eye(2)))

    def test_dual_shares_nonzero_eigenvalues(self):
        M, N = 24, 10
        X = assemble_X(self.Rsqrt, sample_noise(self.spec, M, N, 4), ColumnCovariance.identity(N))
        Rhat = toeplitzify(sample_cov(X), biased=True).to_hermitian()
        Sw = whitened_cov(X, matrix_inv(Rhat), WhitenKind.BIASED)
        dual = dual_cov(X, matrix_inv_sqrt(Rhat))
        assert dual.c == pytest.approx(M / N)
        np.testing.assert_allclose(
            dual.eigenvalues()[:N], Sw.eigenvalues() * M / N, rtol=1e-7
        )

    def test_bulk_follows_marcenko_pastur(self):
        M, N = 1000, 600
        Rsqrt = matrix_sqrt(build_toeplitz(SpectralModel.white(), M).to_hermitian())
        X = assemble_X(Rsqrt, sample_noise(self.spec, M, N, 5), ColumnCovariance.identity(N))
        Sw, _ = whiten_data(X)
        lower, upper = mp_edges(Sw.c)
        values = Sw.eigenvalues()
        inside = np.mean((values >= 0.5 * lower) & (values <= 1.25 * upper))
        assert inside >= 0.97


class TestCalibration:
    def test_thread_count_does_not_matter(self):
        kwargs = dict(M=40, N=200, reps=6, seed=1, model=SpectralModel.white())
        single = calibrate_gammas(**kwargs, threads=1)
        pooled = calibrate_gammas(**kwargs, threads=3)
        assert single == pooled
        assert all(g >= 1.0 for g in single)

    def test_rejects_small_N(self):
        with pytest.raises(ValueError):
            calibrate_gammas(40, 3, 2, 0)


class TestPCA:
    def setup_class(self):
        self.R, self.Rsqrt = _rows(0.7, 60)

    def _spiked(self, alpha: float, N: int = 20):
        C = ColumnCovariance(alphas=(alpha,), N=N)
        _, X = draw_data_matrix(self.Rsqrt, NoiseSpec(NoiseKind.GAUSSIAN_COMPLEX, 6), C, 0)
        Sw, estimate = whiten_data(X, biased=True)
        return X, Sw, matrix_inv_sqrt(estimate.to_hermitian())

    def test_one_dominant_component(self):
        X, Sw, Rhat_inv_sqrt = self._spiked(1e4)
        Xhat, Yhat = pca_compress(X, Sw, 1, Rhat_inv_sqrt)
        assert Xhat.shape == Yhat.shape == (1, 60)
        energy = np.linalg.norm(Xhat) ** 2 / np.linalg.norm(X.entries) ** 2
        assert energy > 0.99

    def test_nothing_to_compress(self):
        X, Sw, Rhat_inv_sqrt = self._spiked(5.0)
        with pytest.raises(EmptySignal):
            pca_compress(X, Sw, 0, Rhat_inv_sqrt)

    def test_reference_phase(self):
        X, Sw, Rhat_inv_sqrt = self._spiked(1e4)
        _, V = Sw.top_eigenpairs(1)
        reference = V * np.exp(0.9j)
        Xhat, _ = pca_compress(X, Sw, 1, Rhat_inv_sqrt, reference=reference)
        np.testing.assert_allclose(Xhat, reference.conj().T @ X.entries.conj().T, atol=1e-8)

    def test_fix_phase(self):
        V = np.array([[0.1j, 2.0], [-3.0j, 0.5j]])
        fixed = fix_phase(V)
        assert fixed[1, 0] == pytest.approx(3.0)
        assert fixed[0, 1] == pytest.approx(2.0)
        np.testing.assert_allclose(np.abs(fixed), np.abs(V))
        np.testing.assert_allclose(fix_phase(V[:, 0]), fixed[:, 0])

    def test_alignment(self):
        u = np.array([1.0, 1j, 0.5])
        assert eigvec_alignment(u, np.exp(1.3j) * 2.0 * u) == pytest.approx(0.0, abs=1e-7)
        assert eigvec_alignment([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.sqrt(2.0))


@pytest.mark.slow
class TestWhiteningAcceptance:
    M, N = 833, 500

    def test_sigma_from_spike_free_bulk(self):
        _, Rsqrt = _rows(0.7, self.M)
        X = assemble_X(
            Rsqrt,
            sample_noise(NoiseSpec(NoiseKind.GAUSSIAN_COMPLEX, 0), self.M, self.N),
            ColumnCovariance.identity(self.N),
        )
        Sw, _ = whiten_data(X)
        assert estimate_sigma(Sw.eigenvalues(), 0, Sw.c) == pytest.approx(1.0, abs=0.1)

    def test_leading_eigenvector_alignment(self):
        _, Rsqrt = _rows(0.7, self.M)
        C = ColumnCovariance(alphas=(20.0,), N=self.N)
        _, X = draw_data_matrix(Rsqrt, NoiseSpec(NoiseKind.GAUSSIAN_COMPLEX, 0), C, 0)
        Sw, _ = whiten_data(X)
        _, V = Sw.top_eigenpairs(1)
        target = np.zeros(self.N)
        target[0] = 1.0
        assert eigvec_alignment(V[:, 0], target) <= thresholds("alignment")["max_alignment"]
