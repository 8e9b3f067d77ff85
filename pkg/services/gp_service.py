import logging
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from config import NOISELESS_JITTER, SAMPLE_CAP
from models.data import Dataset
from models.kernels import SpatialKernel
from models.spectrum import Spectrum, TimeGrid
from services.kernel_service import AnyTemporal, eval_spatial, eval_temporal
from services.spectral_service import build_temporal_matrix, clip_negative, eig_sym, nystrom_eigenfunctions
from utils.errors import CapExceeded, DimensionMismatch, InsufficientData, MissingEigenvectors, SingularSystem

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]


def effective_noise(noise: float) -> float:
    """Дисперсия шума для факторизации: точный ноль заменяется джиттером"""
    return max(noise, NOISELESS_JITTER)


def cross_kernel(
    spatial: SpatialKernel,
    temporal: AnyTemporal,
    X: ArrayLike,
    t: ArrayLike,
    X2: ArrayLike,
    t2: ArrayLike,
) -> NDArray[np.float64]:
    """k((x, t), (x', t')) = k_S(x, x') k_T(t - t') для всех пар"""
    t = np.asarray(t, dtype=float).ravel()
    t2 = np.asarray(t2, dtype=float).ravel()
    K_T = np.asarray(eval_temporal(temporal, t[:, None] - t2[None, :]))
    return eval_spatial(spatial, X, X2) * K_T


class GPPosterior:
    """
    Апостериорный GP, обусловленный на Dataset.

    Хранит нижний множитель Холецкого L матрицы K + σ₀²I и α = (K + σ₀²I)^{-1} y.
    Экземпляр не изменяется после создания; extend возвращает новый объект.
    """

    def __init__(
        self,
        spatial: SpatialKernel,
        temporal: AnyTemporal,
        data: Dataset,
        chol: Optional[NDArray[np.float64]] = None,
    ):
        self.spatial = spatial
        self.temporal = temporal
        self.data = data
        self.noise = effective_noise(data.noise)

        if data.n and chol is None:
            gram = cross_kernel(spatial, temporal, data.X, data.t, data.X, data.t)
            gram[np.diag_indices_from(gram)] += self.noise
            try:
                chol = cholesky(gram, lower=True)
            except LinAlgError as e:
                raise SingularSystem(f"Разложение Холецкого не удалось для n = {data.n}: {e}") from e
        self.chol = chol if data.n else np.empty((0, 0))
        self.alpha = cho_solve((self.chol, True), data.y) if data.n else np.empty(0)

    @property
    def n(self) -> int:
        return self.data.n

    def extend(self, x: ArrayLike, t: float, y: float) -> "GPPosterior":
        """
        Добавляет наблюдение, обновляя множитель Холецкого окаймлением за O(n^2).

        Args:
            x: Пространственная точка
            t: Момент времени
            y: Наблюдение

        Returns:
            Новый GPPosterior
        """
        data = self.data.append(x, t, y)
        x_new = data.X[-1:]
        if self.n == 0:
            return GPPosterior(self.spatial, self.temporal, data)

        k = cross_kernel(self.spatial, self.temporal, self.data.X, self.data.t, x_new, [t]).ravel()
        k_self = 1.0 + self.noise
        column = solve_triangular(self.chol, k, lower=True)
        pivot = k_self - column @ column
        if not np.isfinite(pivot) or pivot <= 0:
            raise SingularSystem(f"Неположительный ведущий элемент {pivot:.3e} при добавлении точки")

        n = self.n
        chol = np.zeros((n + 1, n + 1))
        chol[:n, :n] = self.chol
        chol[n, :n] = column
        chol[n, n] = np.sqrt(pivot)
        return GPPosterior(self.spatial, self.temporal, data, chol)

    def _project(self, X: ArrayLike, t: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        k_cross = cross_kernel(self.spatial, self.temporal, self.data.X, self.data.t, X, t)
        return k_cross, solve_triangular(self.chol, k_cross, lower=True)

    def predict_marginals(self, X: ArrayLike, t: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        Апостериорные средние и дисперсии без построения полной ковариации.

        Args:
            X: Точки запроса (q x d)
            t: Моменты времени запроса (q)

        Returns:
            (средние, дисперсии)
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), (X.shape[0],))
        if X.shape[1] != self.spatial.dim:
            raise DimensionMismatch(f"Ожидалась размерность {self.spatial.dim}, получено {X.shape[1]}")
        if self.n == 0:
            return np.zeros(X.shape[0]), np.ones(X.shape[0])
        k_cross, v = self._project(X, t)
        mean = k_cross.T @ self.alpha
        variance = 1.0 - np.sum(v * v, axis=0)
        return mean, np.maximum(variance, 0.0)

    def predict(self, X: ArrayLike, t: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Апостериорные среднее и полная ковариация в точках запроса"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), (X.shape[0],))
        prior = cross_kernel(self.spatial, self.temporal, X, t, X, t)
        if self.n == 0:
            return np.zeros(X.shape[0]), prior
        k_cross, v = self._project(X, t)
        covariance = prior - v.T @ v
        return k_cross.T @ self.alpha, 0.5 * (covariance + covariance.T)


def fit_posterior(spatial: SpatialKernel, temporal: AnyTemporal, data: Dataset) -> GPPosterior:
    return GPPosterior(spatial, temporal, data)


def posterior(
    spatial: SpatialKernel,
    temporal: AnyTemporal,
    data: Dataset,
    X: ArrayLike,
    t: ArrayLike,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Апостериорные среднее и ковариация GP в точках запроса.

    Args:
        spatial: Пространственное ядро
        temporal: Временное ядро
        data: Наблюдения
        X: Точки запроса (q x d)
        t: Моменты времени запроса (q)

    Returns:
        (средние, ковариационная матрица q x q)
    """
    return fit_posterior(spatial, temporal, data).predict(X, t)


def sample_prior_path(
    spatial: SpatialKernel,
    temporal: AnyTemporal,
    grid_points: ArrayLike,
    time_grid: TimeGrid,
    seed: Seed,
    cap: int = SAMPLE_CAP,
) -> NDArray[np.float64]:
    """
    Точная выборка f̄ из N(0, K_S ⊗ K_T + jitter I) на сетке пространство x время.

    Использует кронекерову структуру: f = U_S [√(d_S d_T^T + jitter) ∘ Z] U_T^T.

    Args:
        spatial: Пространственное ядро
        temporal: Временное ядро
        grid_points: Пространственная сетка (m x d)
        time_grid: Временная сетка
        seed: Зерно генератора или SeedSequence
        cap: Предел числа ячеек m * n

    Returns:
        Матрица m x n значений f̄(x, t)
    """
    grid_points = np.atleast_2d(np.asarray(grid_points, dtype=float))
    m, n = grid_points.shape[0], time_grid.n
    if m * n > cap:
        raise CapExceeded(m, n, cap)

    spatial_spectrum = clip_negative(eig_sym(eval_spatial(spatial, grid_points)))
    temporal_spectrum = clip_negative(eig_sym(build_temporal_matrix(temporal, time_grid)))

    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((m, n))
    scale = np.sqrt(np.outer(spatial_spectrum.eigenvalues, temporal_spectrum.eigenvalues) + NOISELESS_JITTER)
    return spatial_spectrum.eigenvectors @ (scale * Z) @ temporal_spectrum.eigenvectors.T


def mercer_posterior(
    spectrum: Spectrum,
    spatial: SpatialKernel,
    temporal: AnyTemporal,
    data: Dataset,
    X: ArrayLike,
    t: ArrayLike,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Приближение Мерсера для апостериорных среднего и дисперсии.

    μ(z) ≈ (1/n) Σ_i φ̄_i(z) Σ_j φ̄_i(z_j) y_j,  σ²(z) ≈ 1 - Σ_i λ̄_i φ̄_i(z)²,
    где φ̄_i(z) вычисляются продолжением Нистрёма.

    Args:
        spectrum: Спектр K^(n) тех же наблюдений с собственными векторами
        spatial: Пространственное ядро
        temporal: Временное ядро
        data: Наблюдения
        X: Точки запроса (q x d)
        t: Моменты времени запроса (q)

    Returns:
        (приближенные средние, приближенные дисперсии в [0, 1])
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), (X.shape[0],))
    if data.n == 0:
        return np.zeros(X.shape[0]), np.ones(X.shape[0])
    if not spectrum.has_vectors:
        raise MissingEigenvectors("Приближение Мерсера требует собственных векторов")
    if spectrum.eigenvectors.shape[0] != data.n:
        raise InsufficientData(f"Спектр построен по {spectrum.eigenvectors.shape[0]} точкам, а данных {data.n}")

    n = data.n
    phi_query = nystrom_eigenfunctions(spectrum, cross_kernel(spatial, temporal, X, t, data.X, data.t))
    phi_samples = np.sqrt(n) * spectrum.eigenvectors
    operator_values = np.maximum(spectrum.eigenvalues, 0.0) / n

    mean = phi_query @ (phi_samples.T @ data.y) / n
    variance = 1.0 - (phi_query * phi_query) @ operator_values
    return mean, np.clip(variance, 0.0, 1.0)
