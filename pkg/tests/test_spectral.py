import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from experiments.fig1 import product_spectra, top_relative_error
from models.kernels import LowRankKernel, SpatialKernel
from models.spectrum import Spectrum, SpectrumScale, TimeGrid
from services.kernel_service import eval_temporal
from services.spectral_service import (
    approx_lowrank_spectrum,
    approx_product_spectrum,
    approx_temporal_spectrum,
    build_spatiotemporal_matrix,
    build_temporal_matrix,
    circulant_embedding,
    circulant_spectrum,
    clip_negative,
    count_in_interval,
    count_positive,
    eig_sym,
    eigenfunctions_at_samples,
    matrix_spectrum,
    nystrom_eigenfunctions,
    operator_spectrum,
)
from tests.conftest import make_kernel
from utils.errors import DimensionMismatch, DomainError, MissingEigenvectors, WrongClass


class TestMatrices:
    def test_single_sample(self):
        matrix = build_temporal_matrix(make_kernel(family="rbf", lengthscale=1.0), TimeGrid(1, 0.1))
        assert_array_equal(matrix, [[1.0]])

    def test_rbf_toeplitz(self):
        matrix = build_temporal_matrix(make_kernel(family="rbf", lengthscale=1.0), TimeGrid(3, 1.0))
        assert_allclose(matrix[0], [1.0, np.exp(-0.5), np.exp(-2.0)])
        assert_array_equal(matrix, matrix.T)
        assert matrix[1, 2] == matrix[0, 1]

    def test_constant_kernel(self):
        matrix = build_temporal_matrix(make_kernel(family="cosine_sum", lines=[[0.0, 1.0]]), TimeGrid(5, 0.3))
        assert_array_equal(matrix, np.ones((5, 5)))

    def test_duplicated_point(self, spatial_rbf):
        temporal = make_kernel(family="rbf", lengthscale=0.5)
        K = build_spatiotemporal_matrix(spatial_rbf, temporal, [[0.4], [0.4]], [1.0, 1.0])
        assert_allclose(K, np.ones((2, 2)))

    def test_same_location_is_temporal(self, spatial_rbf):
        temporal = make_kernel(family="matern", lengthscale=0.5, nu=1.5)
        K = build_spatiotemporal_matrix(spatial_rbf, temporal, [[0.2], [0.2]], [0.0, 0.3])
        assert K[0, 1] == pytest.approx(eval_temporal(temporal, 0.3))

    def test_hadamard_product(self):
        d, lag = 0.5, 0.1
        spatial = SpatialKernel(family="rbf", lengthscales=(d / np.sqrt(2 * np.log(2)),), dim=1)
        temporal = make_kernel(family="rbf", lengthscale=lag / np.sqrt(2 * np.log(2.5)))
        K = build_spatiotemporal_matrix(spatial, temporal, [[0.0], [d]], [0.0, lag])
        assert K[0, 1] == pytest.approx(0.2, abs=1e-12)
        assert_allclose(np.diag(K), 1.0)

    def test_dimension_mismatch(self, spatial_rbf):
        temporal = make_kernel(family="rbf", lengthscale=0.5)
        with pytest.raises(DimensionMismatch):
            build_spatiotemporal_matrix(spatial_rbf, temporal, np.zeros((3, 2)), [0.1, 0.2, 0.3])
        with pytest.raises(DimensionMismatch):
            build_spatiotemporal_matrix(spatial_rbf, temporal, np.zeros((3, 1)), [0.1, 0.2])


class TestEigSym:
    def test_identity(self):
        assert_array_equal(eig_sym(np.eye(5)).eigenvalues, np.ones(5))

    def test_all_ones(self):
        values = eig_sym(np.ones((6, 6)), want_vectors=False).eigenvalues
        assert values[0] == pytest.approx(6.0)
        assert_allclose(values[1:], 0.0, atol=1e-12)

    def test_against_characteristic_polynomial(self):
        M = build_temporal_matrix(make_kernel(family="rbf", lengthscale=1.0), TimeGrid(3, 0.7))
        minors = sum(M[i, i] * M[j, j] - M[i, j] ** 2 for i in range(3) for j in range(i + 1, 3))
        roots = np.sort(np.roots([1.0, -np.trace(M), minors, -np.linalg.det(M)]).real)[::-1]
        assert_allclose(eig_sym(M, want_vectors=False).eigenvalues, roots, atol=1e-10)

    def test_reconstruction_and_orthonormality(self, rng):
        A = rng.standard_normal((30, 30))
        M = A + A.T
        spectrum = eig_sym(M)
        Q, values = spectrum.eigenvectors, spectrum.eigenvalues
        assert np.all(np.diff(values) <= 0)
        assert np.linalg.norm(Q @ np.diag(values) @ Q.T - M) <= 1e-8 * np.linalg.norm(M)
        assert_allclose(Q.T @ Q, np.eye(30), atol=1e-10)

    def test_not_symmetric(self):
        with pytest.raises(DomainError):
            eig_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_not_square(self):
        with pytest.raises(DimensionMismatch):
            eig_sym(np.zeros((2, 3)))


class TestCirculant:
    def test_two_samples(self):
        kernel = make_kernel(family="rbf", lengthscale=1.0)
        row = circulant_embedding(kernel, TimeGrid(2, 0.5))
        assert_allclose(row, [1.0, 2 * eval_temporal(kernel, 0.5)])
        assert_allclose(np.sort(circulant_spectrum(row).eigenvalues), np.sort([1 + row[1], 1 - row[1]]))

    def test_palindrome(self):
        row = circulant_embedding(make_kernel(family="matern", lengthscale=0.3, nu=2.5), TimeGrid(9, 0.1))
        assert_allclose(row[1:], row[1:][::-1])

    def test_too_small(self):
        with pytest.raises(DomainError):
            circulant_embedding(make_kernel(family="rbf", lengthscale=1.0), TimeGrid(1, 0.1))

    def test_asymptotic_equivalence(self):
        kernel = make_kernel(family="rbf", lengthscale=0.5)
        deviations = []
        for n in (50, 100, 200, 400):
            grid = TimeGrid(n, 0.1)
            toeplitz = eig_sym(build_temporal_matrix(kernel, grid), want_vectors=False).eigenvalues
            circulant = circulant_spectrum(circulant_embedding(kernel, grid)).eigenvalues
            deviations.append(np.mean(np.abs(toeplitz - circulant)))
        assert all(later < earlier for earlier, later in zip(deviations, deviations[1:]))


class TestTemporalApproximation:
    def test_frequency_grid(self):
        sampled = approx_temporal_spectrum(make_kernel(family="rbf", lengthscale=0.25), TimeGrid(100, 0.1))
        assert sampled.frequencies[0] == pytest.approx(-49 / 10)
        assert sampled.frequencies[-1] == pytest.approx(5.0)

    def test_frequency_span_doubles(self):
        kernel = make_kernel(family="rbf", lengthscale=0.25)
        coarse = approx_temporal_spectrum(kernel, TimeGrid(100, 0.1)).frequency_span
        fine = approx_temporal_spectrum(kernel, TimeGrid(100, 0.05)).frequency_span
        assert fine == pytest.approx(2 * coarse, rel=1e-12)

    def test_broadband_mae_decreases(self):
        kernel = make_kernel(family="rbf", lengthscale=0.25)
        for delta in (0.1, 0.05):
            errors = []
            for n in (100, 200):
                grid = TimeGrid(n, delta)
                exact = eig_sym(build_temporal_matrix(kernel, grid), want_vectors=False).eigenvalues
                approx = approx_temporal_spectrum(kernel, grid).spectrum.eigenvalues
                errors.append(np.mean(np.abs(exact - approx)))
            assert errors[1] < errors[0]

    def test_bandlimited_peak(self):
        kernel = make_kernel(family="sinc_squared", bandlimit=1.0)
        grid = TimeGrid(200, 0.5)
        approx = approx_temporal_spectrum(kernel, grid).spectrum
        exact = eig_sym(build_temporal_matrix(kernel, grid), want_vectors=False)
        assert approx.lambda_max == pytest.approx(2.0)
        assert np.mean(np.abs(exact.eigenvalues - approx.eigenvalues)) < 0.05

    def test_sinc_positive_count(self):
        kernel = make_kernel(family="sinc", bandlimit=1.0)
        grid = TimeGrid(100, 0.25)
        approx = approx_temporal_spectrum(kernel, grid).spectrum
        assert count_positive(approx) == 50
        assert_array_equal(approx.eigenvalues[50:], 0.0)

        exact = eig_sym(build_temporal_matrix(kernel, grid), want_vectors=False)
        # Спектр симметричен относительно 1: ровно половина выше
        assert int(np.count_nonzero(exact.eigenvalues > 1.0)) == 50

    def test_sinc_above_nyquist(self):
        kernel = make_kernel(family="sinc", bandlimit=1.0)
        grid = TimeGrid(100, 0.6)
        assert count_positive(approx_temporal_spectrum(kernel, grid).spectrum) == 100
        assert count_positive(eig_sym(build_temporal_matrix(kernel, grid), want_vectors=False)) == 100

    @pytest.mark.parametrize("fields", [
        {"family": "periodic", "period": 1.0, "lengthscale": 1.0},
        {"family": "cosine_sum", "lines": [[0.0, 1.0]]},
    ])
    def test_discrete_rejected(self, fields):
        with pytest.raises(WrongClass):
            approx_temporal_spectrum(make_kernel(**fields), TimeGrid(10, 0.1))


class TestLowRankSpectrum:
    def test_two_lines(self):
        kernel = make_kernel(family="cosine_sum", lines=[[0.0, 0.5], [1.0, 0.5]])
        values = approx_lowrank_spectrum(kernel, 100).eigenvalues
        assert_allclose(values[:3], [50.0, 25.0, 25.0])
        assert_array_equal(values[3:], 0.0)

    def test_constant(self):
        values = approx_lowrank_spectrum(LowRankKernel(c0=1.0), 7).eigenvalues
        assert_allclose(values, [7.0, 0, 0, 0, 0, 0, 0])

    def test_nonzero_count(self):
        kernel = LowRankKernel(c0=0.2, coefficients=(0.4, 0.4), frequencies=(0.37, 1.13))
        assert count_positive(approx_lowrank_spectrum(kernel, 64)) == kernel.max_nonzero_eigenvalues == 5

    def test_matches_exact(self):
        kernel = make_kernel(family="cosine_sum", lines=[[0.0, 0.5], [1.0, 0.5]])
        exact = eig_sym(build_temporal_matrix(kernel, TimeGrid(100, 0.1)), want_vectors=False).eigenvalues
        assert_allclose(exact[:3], [50.0, 25.0, 25.0], rtol=0.05)
        assert exact[3] < 1e-6 * exact[0]

    def test_rank_bound_on_exact_matrix(self):
        kernel = LowRankKernel(c0=0.2, coefficients=(0.4, 0.4), frequencies=(0.37, 1.13))
        exact = eig_sym(build_temporal_matrix(kernel, TimeGrid(64, 0.1)), want_vectors=False)
        assert count_positive(exact) <= 5

    def test_signed_coefficients_sorted_last(self):
        kernel = LowRankKernel(c0=0.6, coefficients=(0.5, -0.1), frequencies=(1.0, 2.0))
        values = approx_lowrank_spectrum(kernel, 10).eigenvalues
        assert_allclose(values, [6.0, 2.5, 2.5, 0, 0, 0, 0, 0, -0.5, -0.5])
        assert kernel.negative_mass == pytest.approx(0.1)
        assert count_positive(approx_lowrank_spectrum(kernel, 10)) == 3

    @pytest.mark.parametrize("divisor", [3, 6])
    @pytest.mark.parametrize("n", [60, 120])
    def test_commensurate_periodic(self, divisor, n):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=1.0)
        exact = eig_sym(build_temporal_matrix(kernel, TimeGrid(n, 1.0 / divisor)), want_vectors=False)
        assert count_positive(exact) == divisor

    def test_rejects_broadband(self):
        with pytest.raises(WrongClass):
            approx_lowrank_spectrum(make_kernel(family="rbf", lengthscale=1.0), 10)


class TestProductSpectrum:
    def test_small_example(self):
        result = approx_product_spectrum(Spectrum(np.array([2.0, 1.0])), Spectrum(np.array([3.0, 1.0])), 3)
        assert_allclose(result.eigenvalues, [2.0, 1.0, 2.0 / 3])
        assert_array_equal(result.provenance[0], [1, 1])

    def test_zeros(self):
        result = approx_product_spectrum(Spectrum(np.zeros(3)), Spectrum(np.zeros(3)), 3)
        assert_array_equal(result.eigenvalues, np.zeros(3))

    def test_matches_brute_force(self, rng):
        for _ in range(50):
            s = np.sort(rng.random(int(rng.integers(1, 11))))[::-1]
            t = np.sort(rng.random(int(rng.integers(1, 11))))[::-1]
            n = int(rng.integers(1, 31))
            products = np.sort(np.outer(s, t).ravel())[::-1][:n] / n
            expected = np.concatenate([products, np.zeros(n - products.size)])
            result = approx_product_spectrum(Spectrum(s), Spectrum(t), n)
            assert_allclose(result.eigenvalues, expected, rtol=1e-15)

    def test_negative_values_clipped(self):
        result = approx_product_spectrum(Spectrum(np.array([1.0, -1e-14])), Spectrum(np.array([2.0])), 2)
        assert np.all(result.eigenvalues >= 0)

    def test_provenance_pairs(self):
        result = approx_product_spectrum(Spectrum(np.array([4.0, 1.0])), Spectrum(np.array([3.0, 2.0])), 4)
        assert_array_equal(result.provenance, [[1, 1], [1, 2], [2, 1], [2, 2]])

    @staticmethod
    def _mean_error(n: int, seeds) -> float:
        spatial = SpatialKernel(family="rbf", lengthscales=(1.0,), dim=1)
        temporal = make_kernel(family="rbf", lengthscale=0.1)
        errors = []
        for seed in seeds:
            spectra = product_spectra(spatial, temporal, n, 0.1, seed)
            errors.append(top_relative_error(spectra["exact"], spectra["approx"], 20))
        return float(np.mean(errors))

    def test_rbf_product_error_decreases_with_n(self):
        seeds = range(10)
        assert self._mean_error(100, seeds) <= 0.15
        assert self._mean_error(200, seeds) < self._mean_error(50, seeds)


class TestCounting:
    def test_interval(self):
        spectrum = Spectrum(np.array([3.0, 2.0, 1.5, 1.0, 0.5]))
        assert count_in_interval(spectrum, 1.0, 2.0) == 3
        assert count_in_interval(spectrum, 4.0, 5.0) == 0

    def test_empty_interval(self):
        with pytest.raises(DomainError):
            count_in_interval(Spectrum(np.array([1.0])), 2.0, 1.0)

    def test_positive(self):
        assert count_positive(Spectrum(np.array([1.0, 1e-6, 1e-9, 0.0]))) == 2
        assert count_positive(Spectrum(np.zeros(3))) == 0

    def test_clip_negative(self):
        clipped = clip_negative(Spectrum(np.array([1.0, 0.0, -1e-3])))
        assert_array_equal(clipped.eigenvalues, [1.0, 0.0, 0.0])

    def test_scale_conversions(self):
        spectrum = Spectrum(np.array([4.0, 2.0]))
        operator = operator_spectrum(spectrum)
        assert operator.scale == SpectrumScale.OPERATOR
        assert_allclose(operator.eigenvalues, [2.0, 1.0])
        assert_allclose(matrix_spectrum(operator).eigenvalues, spectrum.eigenvalues)

    def test_unsorted_rejected(self):
        with pytest.raises(DomainError):
            Spectrum(np.array([1.0, 2.0]))


class TestEigenfunctions:
    def test_nystrom_reproduces_samples(self, spatial_rbf, rng):
        temporal = make_kernel(family="rbf", lengthscale=0.5)
        X, t = rng.random((20, 1)), 0.1 * np.arange(1, 21)
        K = build_spatiotemporal_matrix(spatial_rbf, temporal, X, t)
        spectrum = eig_sym(K)
        extended = nystrom_eigenfunctions(spectrum, K)
        at_samples = eigenfunctions_at_samples(spectrum)
        keep = spectrum.eigenvalues > 1e-8 * spectrum.lambda_max
        assert_allclose(extended[:, keep], at_samples[:, keep], atol=1e-6)
        assert_array_equal(extended[:, ~keep], 0.0)

    def test_missing_vectors(self):
        spectrum = Spectrum(np.array([1.0]))
        with pytest.raises(MissingEigenvectors):
            nystrom_eigenfunctions(spectrum, [[1.0]])
        with pytest.raises(MissingEigenvectors):
            eigenfunctions_at_samples(spectrum)

    def test_cross_shape(self):
        spectrum = eig_sym(np.eye(3))
        with pytest.raises(DimensionMismatch):
            nystrom_eigenfunctions(spectrum, np.ones((2, 4)))
