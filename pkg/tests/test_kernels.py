import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError
from scipy.integrate import quad, trapezoid
from scipy.linalg import eigvalsh

import services.kernel_service as kernel_service
from models.kernels import KernelClass, KernelClassTag, LowRankKernel, SpatialKernel, TemporalKernel
from services.kernel_service import (
    classify,
    eval_spatial,
    eval_temporal,
    low_rank_approx,
    spectral_density,
    spectral_lines,
    to_low_rank,
    truncate_lines,
)
from tests.conftest import make_kernel
from utils.errors import DimensionMismatch, DomainError, ToleranceUnreachable, WrongClass


class TestEvaluation:
    """Значения корреляционных функций"""

    def test_unit_at_zero(self, temporal_kernel):
        assert eval_temporal(temporal_kernel, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_even(self, temporal_kernel, rng):
        lags = rng.uniform(-20, 20, size=1000)
        assert_allclose(eval_temporal(temporal_kernel, lags), eval_temporal(temporal_kernel, -lags), rtol=0, atol=1e-15)

    def test_bounded_by_one(self, temporal_kernel, rng):
        values = eval_temporal(temporal_kernel, rng.uniform(-50, 50, size=2000))
        assert np.all(np.abs(values) <= 1.0 + 1e-12)

    def test_scalar_in_scalar_out(self):
        value = eval_temporal(make_kernel(family="rbf", lengthscale=1.0), 1.0)
        assert isinstance(value, float)
        assert value == pytest.approx(np.exp(-0.5))

    def test_sinc_zero_at_half_period(self):
        kernel = make_kernel(family="sinc", bandlimit=1.0)
        assert eval_temporal(kernel, 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_cosine_sum_quarter_period(self):
        kernel = make_kernel(family="cosine_sum", lines=[[0.0, 0.5], [1.0, 0.5]])
        assert eval_temporal(kernel, 0.25) == pytest.approx(0.5, abs=1e-12)

    def test_matern_half_is_exponential(self):
        kernel = make_kernel(family="matern", lengthscale=0.5, nu=0.5)
        assert eval_temporal(kernel, -1.0) == pytest.approx(np.exp(-2.0))

    def test_lowrank_matches_cosine_sum(self, rng):
        kernel = make_kernel(family="cosine_sum", lines=[[0.0, 0.2], [0.37, 0.4], [1.13, 0.4]])
        lags = rng.uniform(-10, 10, size=200)
        assert_allclose(eval_temporal(to_low_rank(kernel), lags), eval_temporal(kernel, lags), atol=1e-12)

    def test_positive_semidefinite_on_random_times(self, temporal_kernel, rng):
        for _ in range(50):
            size = int(rng.integers(2, 41))
            times = np.sort(rng.uniform(0, 10, size=size))
            matrix = eval_temporal(temporal_kernel, times[:, None] - times[None, :])
            assert eigvalsh(matrix).min() >= -1e-8


class TestSpatial:
    def test_diagonal_is_one(self, rng):
        kernel = SpatialKernel(family="matern", lengthscales=(0.3, 0.5), dim=2, nu=1.5)
        X = rng.random((10, 2))
        assert_allclose(np.diag(eval_spatial(kernel, X)), 1.0)

    def test_anisotropic_scales(self):
        kernel = SpatialKernel(family="rbf", lengthscales=(1.0, 0.5), dim=2)
        value = eval_spatial(kernel, [[0.0, 0.0]], [[0.0, 0.5]])[0, 0]
        assert value == pytest.approx(np.exp(-0.5))

    def test_dimension_mismatch(self, spatial_rbf):
        with pytest.raises(DimensionMismatch):
            eval_spatial(spatial_rbf, np.zeros((3, 2)))

    def test_scales_broadcast(self):
        assert SpatialKernel(family="rbf", lengthscales=(0.2,), dim=3).scales == (0.2, 0.2, 0.2)

    def test_wrong_number_of_lengthscales(self):
        with pytest.raises(ValidationError):
            SpatialKernel(family="rbf", lengthscales=(0.2, 0.3), dim=3)


class TestSpectralDensity:
    """Плотности S_T в соглашении exp(-2πiωu)"""

    @pytest.mark.parametrize("fields, grid", [
        ({"family": "rbf", "lengthscale": 1.0}, np.linspace(-3, 3, 60001)),
        ({"family": "matern", "lengthscale": 1.0, "nu": 0.5}, np.linspace(-500, 500, 1000001)),
        ({"family": "matern", "lengthscale": 1.0, "nu": 1.5}, np.linspace(-100, 100, 400001)),
        ({"family": "matern", "lengthscale": 1.0, "nu": 2.5}, np.linspace(-50, 50, 200001)),
        ({"family": "rational_quadratic", "lengthscale": 1.0, "alpha": 2.0}, np.linspace(-20, 20, 400001)),
        ({"family": "sinc", "bandlimit": 1.0}, np.linspace(-2, 2, 40001)),
        ({"family": "sinc_squared", "bandlimit": 1.0}, np.linspace(-2, 2, 40001)),
    ])
    def test_normalized(self, fields, grid):
        kernel = make_kernel(**fields)
        assert trapezoid(spectral_density(kernel, grid), grid) == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("fields", [
        {"family": "rbf", "lengthscale": 0.7},
        {"family": "matern", "lengthscale": 0.7, "nu": 1.5},
        {"family": "matern", "lengthscale": 0.7, "nu": 2.5},
        {"family": "rational_quadratic", "lengthscale": 0.7, "alpha": 1.5},
        {"family": "sinc_squared", "bandlimit": 1.0},
    ])
    def test_nonnegative(self, fields):
        kernel = make_kernel(**fields)
        assert np.all(spectral_density(kernel, np.linspace(-10, 10, 4001)) >= 0)

    @pytest.mark.parametrize("fields", [
        {"family": "rbf", "lengthscale": 0.7},
        {"family": "matern", "lengthscale": 0.7, "nu": 1.5},
        {"family": "rational_quadratic", "lengthscale": 0.7, "alpha": 1.5},
        {"family": "rational_quadratic", "lengthscale": 1.2, "alpha": 3.0},
    ])
    @pytest.mark.parametrize("omega", [0.0, 0.3, 0.9])
    def test_matches_fourier_integral(self, fields, omega):
        kernel = make_kernel(**fields)
        if omega == 0.0:
            integral, _ = quad(lambda u: eval_temporal(kernel, u), 0, np.inf)
        else:
            integral, _ = quad(lambda u: eval_temporal(kernel, u), 0, np.inf, weight="cos", wvar=2 * np.pi * omega)
        assert spectral_density(kernel, omega) == pytest.approx(2 * integral, rel=1e-6, abs=1e-7)

    def test_rbf_at_zero(self):
        kernel = make_kernel(family="rbf", lengthscale=1.0)
        assert spectral_density(kernel, 0.0) == pytest.approx(np.sqrt(2 * np.pi), abs=1e-6)

    def test_sinc_half_open_band(self):
        kernel = make_kernel(family="sinc", bandlimit=1.0)
        values = spectral_density(kernel, np.array([-1.0, -0.5, 1.0, 2.0]))
        assert_allclose(values, [0.0, 0.5, 0.5, 0.0])

    def test_cosine_sum_lines(self):
        kernel = make_kernel(family="cosine_sum", lines=[[0.0, 0.5], [3.0, 0.5]])
        frequencies, weights = spectral_density(kernel, 0.0)
        assert_allclose(frequencies, [-3.0, 0.0, 3.0])
        assert_allclose(weights, [0.25, 0.5, 0.25])

    def test_periodic_lines_sum_to_one(self):
        frequencies, weights = spectral_lines(make_kernel(family="periodic", period=1.0, lengthscale=0.8))
        assert weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(frequencies) > 0)

    def test_periodic_lines_reproduce_kernel(self, rng):
        kernel = make_kernel(family="periodic", period=0.7, lengthscale=0.6)
        frequencies, weights = spectral_lines(kernel)
        lags = rng.uniform(-5, 5, size=100)
        rebuilt = np.cos(2 * np.pi * np.outer(lags, frequencies)) @ weights
        assert_allclose(rebuilt, eval_temporal(kernel, lags), atol=1e-12)

    def test_lines_for_continuous_kernel(self):
        with pytest.raises(WrongClass):
            spectral_lines(make_kernel(family="rbf", lengthscale=1.0))


class TestClassification:
    @pytest.mark.parametrize("fields, tag", [
        ({"family": "rbf", "lengthscale": 1.0}, KernelClassTag.BROADBAND),
        ({"family": "matern", "lengthscale": 1.0, "nu": 2.5}, KernelClassTag.BROADBAND),
        ({"family": "rational_quadratic", "lengthscale": 1.0}, KernelClassTag.BROADBAND),
        ({"family": "sinc", "bandlimit": 1.0}, KernelClassTag.BAND_LIMITED),
        ({"family": "sinc_squared", "bandlimit": 1.0}, KernelClassTag.BAND_LIMITED),
        ({"family": "periodic", "period": 1.0, "lengthscale": 1.0}, KernelClassTag.ALMOST_PERIODIC),
        ({"family": "cosine_sum", "lines": [[0.0, 1.0]]}, KernelClassTag.LOW_RANK),
    ])
    def test_classify(self, fields, tag):
        assert classify(make_kernel(**fields)).tag == tag

    def test_periodic_support(self):
        kernel_class = classify(make_kernel(family="periodic", period=1.0, lengthscale=1.0))
        assert kernel_class.support_discrete and not kernel_class.support_bounded

    def test_tag_must_match_support(self):
        with pytest.raises(ValidationError):
            KernelClass(tag=KernelClassTag.LOW_RANK, support_bounded=False, support_discrete=False)


class TestKernelValidation:
    def test_missing_lengthscale(self):
        with pytest.raises(ValidationError):
            TemporalKernel(family="rbf")

    def test_unsupported_matern_order(self):
        with pytest.raises(ValidationError):
            make_kernel(family="matern", lengthscale=1.0, nu=1.0)

    def test_cosine_sum_weights_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            make_kernel(family="cosine_sum", lines=[[0.0, 0.5], [1.0, 0.4]])

    def test_cosine_sum_distinct_frequencies(self):
        with pytest.raises(ValidationError):
            make_kernel(family="cosine_sum", lines=[[1.0, 0.5], [1.0, 0.5]])

    def test_lowrank_sum(self):
        with pytest.raises(ValidationError):
            LowRankKernel(c0=0.5, coefficients=(0.2,), frequencies=(1.0,))

    def test_json_roundtrip(self):
        kernel = make_kernel(family="periodic", period=0.3, lengthscale=1.0)
        assert TemporalKernel.model_validate_json(kernel.model_dump_json()) == kernel


class TestLowRankApprox:
    """Приближение почти-периодического ядра суммой косинусов"""

    @staticmethod
    def _grid_error(kernel, approx, delta, n):
        lags = delta * np.arange(n)
        return np.max(np.abs(eval_temporal(kernel, lags) - eval_temporal(approx, lags)))

    def test_cosine_sum_is_identity(self):
        kernel = make_kernel(family="cosine_sum", lines=[[0.0, 0.5], [1.0, 0.5]])
        approx = low_rank_approx(kernel, 0.1, 50, 1e-8)
        assert approx == to_low_rank(kernel)
        assert self._grid_error(kernel, approx, 0.1, 50) == 0.0

    def test_commensurate_third(self):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=1.0)
        approx = low_rank_approx(kernel, 1.0 / 3, 64, 1e-8)
        assert approx.rank <= 1
        assert approx.c0 > 0
        assert self._grid_error(kernel, approx, 1.0 / 3, 64) <= 1e-8

    def test_commensurate_half(self):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=1.0)
        approx = low_rank_approx(kernel, 0.5, 65, 1e-8)
        # Отсчеты чередуются 1, k_T(r/2) > 0: среднее c_0 положительно и при четном k,
        # а разность (1 - k_T(r/2))/2 несет косинус на частоте 1/r
        assert approx.rank <= 1
        assert approx.c0 == pytest.approx((1 + eval_temporal(kernel, 0.5)) / 2, abs=1e-8)
        assert self._grid_error(kernel, approx, 0.5, 65) <= 1e-8

    def test_untruncated_reconstruction(self):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=0.7)
        approx = low_rank_approx(kernel, 1.0 / 7, 64, 1e-12, truncate=False)
        assert self._grid_error(kernel, approx, 1.0 / 7, 64) <= 1e-10

    @pytest.mark.parametrize("n, delta", [(60, 1.0 / 3), (20, 0.1), (64, 0.37)])
    def test_non_commensurate_grid(self, n, delta):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=1.0)
        approx = low_rank_approx(kernel, delta, n, 1e-8)
        assert self._grid_error(kernel, approx, delta, n) <= 1e-8 + 1e-12
        assert approx.c0 + sum(approx.coefficients) == pytest.approx(1.0)
        assert approx.negative_mass >= 0.0

    def test_tolerance_unreachable(self, monkeypatch):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=1.0)
        monkeypatch.setattr(kernel_service, "eval_temporal", lambda _, u: np.full(np.shape(u), np.nan))
        with pytest.raises(ToleranceUnreachable):
            low_rank_approx(kernel, 0.1, 20, 1e-8)

    def test_wrong_class(self):
        with pytest.raises(WrongClass):
            low_rank_approx(make_kernel(family="rbf", lengthscale=1.0), 0.1, 20, 1e-8)

    def test_bad_arguments(self):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=1.0)
        with pytest.raises(DomainError):
            low_rank_approx(kernel, 0.1, 1, 1e-8)
        with pytest.raises(DomainError):
            low_rank_approx(kernel, 0.1, 20, 0.0)
        with pytest.raises(DomainError):
            low_rank_approx(kernel, 0.1, 20, 1e-8, method="fft")

    def test_line_truncation_bound(self):
        kernel = make_kernel(family="periodic", period=1.0, lengthscale=1.0)
        approx = low_rank_approx(kernel, 0.1, 20, 1e-6, method="lines")
        lags = np.linspace(-3, 3, 6001)
        assert np.max(np.abs(eval_temporal(kernel, lags) - eval_temporal(approx, lags))) <= 2e-6

    def test_truncate_lines_keeps_one_line(self):
        approx = truncate_lines(make_kernel(family="periodic", period=1.0, lengthscale=1.0), 10.0)
        assert approx.c0 + sum(approx.coefficients) == pytest.approx(1.0)
        assert approx.max_nonzero_eigenvalues >= 1
