import heapq
import logging
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.fft import fft
from scipy.linalg import LinAlgError, eigh, toeplitz

from config import NEGATIVE_CLIP_WARNING, POSITIVE_REL_THRESHOLD, SYMMETRY_TOLERANCE
from models.kernels import LowRankKernel, SpatialKernel, TemporalFamily, TemporalKernel
from models.spectrum import SampledSpectrum, Spectrum, SpectrumScale, SymMatrix, TimeGrid
from services.kernel_service import (
    AnyTemporal,
    classify,
    eval_spatial,
    eval_temporal,
    spectral_density,
    to_low_rank,
)
from utils.errors import ConvergenceFailure, DimensionMismatch, DomainError, MissingEigenvectors, ScaleMismatch, WrongClass

logger = logging.getLogger(__name__)


def build_temporal_matrix(kernel: AnyTemporal, grid: TimeGrid) -> SymMatrix:
    """
    Матрица Тёплица K_T с элементами k_T(Δ|i - j|).

    Args:
        kernel: Временное ядро
        grid: Временная сетка

    Returns:
        Симметричная матрица n x n
    """
    first_row = np.asarray(eval_temporal(kernel, grid.lags), dtype=float)
    return toeplitz(first_row)


def build_spatiotemporal_matrix(
    spatial: SpatialKernel,
    temporal: AnyTemporal,
    X: ArrayLike,
    t: ArrayLike,
) -> SymMatrix:
    """
    Матрица K = K_S ∘ K_T для точек (x_i, t_i).

    Args:
        spatial: Пространственное ядро
        temporal: Временное ядро
        X: Пространственные координаты (n x d)
        t: Моменты времени (n)

    Returns:
        Поэлементное произведение пространственной и временной матриц
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    t = np.asarray(t, dtype=float).ravel()
    if X.shape[1] != spatial.dim:
        raise DimensionMismatch(f"Ожидалась пространственная размерность {spatial.dim}, получено {X.shape[1]}")
    if X.shape[0] != t.size:
        raise DimensionMismatch(f"Число точек {X.shape[0]} не совпадает с числом моментов времени {t.size}")
    K_S = eval_spatial(spatial, X)
    K_T = np.asarray(eval_temporal(temporal, t[:, None] - t[None, :]))
    return K_S * K_T


def eig_sym(matrix: SymMatrix, want_vectors: bool = True) -> Spectrum:
    """
    Полное собственное разложение симметричной матрицы.

    Трехдиагонализация + неявный QL/QR (LAPACK syev), без случайности.

    Args:
        matrix: Симметричная матрица
        want_vectors: Вычислять ли собственные векторы

    Returns:
        Spectrum с собственными значениями по невозрастанию
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Ожидалась квадратная матрица, получено {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("Матрица содержит нечисловые элементы")
    scale = max(np.max(np.abs(m)), 1.0) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.T)) > SYMMETRY_TOLERANCE * scale:
        raise DomainError("Матрица не симметрична")

    try:
        if want_vectors:
            values, vectors = eigh(m, driver="ev")
            return Spectrum(values[::-1].copy(), vectors[:, ::-1].copy())
        values = eigh(m, eigvals_only=True, driver="ev")
    except LinAlgError as e:
        raise ConvergenceFailure(f"Собственный решатель не сошелся: {e}") from e
    return Spectrum(values[::-1].copy())


def circulant_embedding(kernel: AnyTemporal, grid: TimeGrid) -> NDArray[np.float64]:
    """Первая строка циркулянта: c_0 = k_T(0), c_j = k_T(jΔ) + k_T((n - j)Δ)"""
    n = grid.n
    if n < 2:
        raise DomainError("Циркулянтное вложение требует n >= 2")
    j = np.arange(n)
    row = np.asarray(eval_temporal(kernel, grid.delta * j)) + np.asarray(eval_temporal(kernel, grid.delta * (n - j)))
    row[0] = eval_temporal(kernel, 0.0)
    return row


def circulant_spectrum(first_row: ArrayLike) -> Spectrum:
    """Собственные значения симметричного циркулянта через БПФ первой строки"""
    values = np.real(fft(np.asarray(first_row, dtype=float)))
    return Spectrum(np.sort(values)[::-1].copy())


def approx_temporal_spectrum(kernel: TemporalKernel, grid: TimeGrid) -> SampledSpectrum:
    """
    Приближение спектра K_T отсчетами S_T / Δ на центрированной сетке частот.

    Args:
        kernel: Широкополосное или полосно-ограниченное ядро
        grid: Временная сетка

    Returns:
        SampledSpectrum: частоты (i - n/2) / (nΔ), i = 1..n, и значения S_T / Δ;
        отсортированный спектр доступен через .spectrum
    """
    kernel_class = classify(kernel)
    if kernel_class.is_discrete:
        raise WrongClass("approx_temporal_spectrum", kernel_class.tag.value)
    n, delta = grid.n, grid.delta
    frequencies = (np.arange(1, n + 1) - n / 2) / (n * delta)
    values = np.asarray(spectral_density(kernel, frequencies), dtype=float) / delta
    return SampledSpectrum(frequencies, values)


def approx_lowrank_spectrum(kernel: Union[LowRankKernel, TemporalKernel], n: int) -> Spectrum:
    """
    Спектр низкорангового ядра: [n c_0, (n/2) c_1, (n/2) c_1, ..., 0, ...].

    Args:
        kernel: LowRankKernel или ядро CosineSum
        n: Размер матрицы

    Returns:
        n значений по невозрастанию, не более 2L + 1 ненулевых
    """
    if isinstance(kernel, TemporalKernel):
        if kernel.family != TemporalFamily.COSINE_SUM:
            raise WrongClass("approx_lowrank_spectrum", classify(kernel).tag.value)
        kernel = to_low_rank(kernel)
    values = [n * kernel.c0] if kernel.c0 > 0 else []
    for c in kernel.coefficients:
        values.extend([n * c / 2, n * c / 2])
    values = np.asarray(values, dtype=float)
    values = np.concatenate([values, np.zeros(max(n - values.size, 0))])
    # Отрицательные коэффициенты дают отрицательные значения в конце спектра
    return Spectrum(np.sort(values)[::-1][:n])


def clip_negative(spectrum: Spectrum) -> Spectrum:
    """Обнуляет отрицательные собственные значения, предупреждая о заметных"""
    values = spectrum.eigenvalues
    if values.size == 0 or values.min() >= 0:
        return spectrum
    worst = float(values.min())
    if worst < -NEGATIVE_CLIP_WARNING * max(abs(spectrum.lambda_max), 0.0):
        logger.warning(f"Отрицательное собственное значение {worst:.3e} обнулено (λ_max = {spectrum.lambda_max:.3e})")
    return spectrum.with_values(np.maximum(values, 0.0))


def approx_product_spectrum(spatial: Spectrum, temporal: Spectrum, n: int) -> Spectrum:
    """
    n наибольших произведений (1/n) λ_i(K_S) λ_j(K_T) с парами индексов.

    Обход решетки произведений через max-кучу, без построения всех n^2 произведений.

    Args:
        spatial: Спектр K_S (по невозрастанию)
        temporal: Спектр K_T (по невозрастанию)
        n: Число отсчетов

    Returns:
        Spectrum со значениями и provenance (пары (i, j), нумерация с 1)
    """
    if n < 1:
        raise DomainError("n должно быть >= 1")
    s = clip_negative(spatial).eigenvalues
    t = clip_negative(temporal).eigenvalues
    values = np.zeros(n)
    provenance = np.zeros((n, 2), dtype=np.int64)
    if s.size == 0 or t.size == 0:
        return Spectrum(values, provenance=provenance)

    heap = [(-s[0] * t[0], 0, 0)]
    visited = {(0, 0)}
    count = 0
    while heap and count < n:
        negative, i, j = heapq.heappop(heap)
        values[count] = -negative / n
        provenance[count] = (i + 1, j + 1)
        count += 1
        for a, b in ((i + 1, j), (i, j + 1)):
            if a < s.size and b < t.size and (a, b) not in visited:
                visited.add((a, b))
                heapq.heappush(heap, (-s[a] * t[b], a, b))
    return Spectrum(values, provenance=provenance)


def count_in_interval(spectrum: Spectrum, a: float, b: float) -> int:
    """Число собственных значений λ с a <= λ <= b"""
    if a > b:
        raise DomainError(f"Пустой интервал: a = {a} > b = {b}")
    values = spectrum.eigenvalues
    return int(np.count_nonzero((values >= a) & (values <= b)))


def count_positive(spectrum: Spectrum, rel_threshold: float = POSITIVE_REL_THRESHOLD) -> int:
    """Число собственных значений выше rel_threshold * λ_max"""
    if spectrum.size == 0 or spectrum.lambda_max <= 0:
        return 0
    return int(np.count_nonzero(spectrum.eigenvalues > rel_threshold * spectrum.lambda_max))


def operator_spectrum(spectrum: Spectrum, n: Optional[int] = None) -> Spectrum:
    """Переводит спектр матрицы K^(n) в масштаб оператора (λ / n)"""
    if spectrum.scale == SpectrumScale.OPERATOR:
        return spectrum
    n = spectrum.size if n is None else n
    return spectrum.with_values(spectrum.eigenvalues / n, SpectrumScale.OPERATOR)


def matrix_spectrum(spectrum: Spectrum, n: Optional[int] = None) -> Spectrum:
    """Обратный перевод: λ = n λ̄"""
    if spectrum.scale == SpectrumScale.MATRIX:
        return spectrum
    n = spectrum.size if n is None else n
    return spectrum.with_values(spectrum.eigenvalues * n, SpectrumScale.MATRIX)


def eigenfunctions_at_samples(spectrum: Spectrum) -> NDArray[np.float64]:
    """Оценки собственных функций в точках выборки: φ̄_i(z_j) ≈ √n Φ_ji"""
    if not spectrum.has_vectors:
        raise MissingEigenvectors("Для оценки собственных функций нужны собственные векторы")
    if spectrum.scale != SpectrumScale.MATRIX:
        raise ScaleMismatch("Ожидался спектр матрицы K^(n)")
    n = spectrum.eigenvectors.shape[0]
    return np.sqrt(n) * spectrum.eigenvectors


def retained_mask(spectrum: Spectrum, rel_threshold: float = POSITIVE_REL_THRESHOLD) -> NDArray[np.bool_]:
    if spectrum.size == 0 or spectrum.lambda_max <= 0:
        return np.zeros(spectrum.size, dtype=bool)
    return spectrum.eigenvalues > rel_threshold * spectrum.lambda_max


def nystrom_eigenfunctions(spectrum: Spectrum, k_cross: ArrayLike) -> NDArray[np.float64]:
    """
    Продолжение Нистрёма: φ̄_i(z) ≈ (√n / λ_i) Σ_j Φ_ji k(z, z_j).

    Args:
        spectrum: Спектр K^(n) с собственными векторами
        k_cross: Матрица k(z, z_j) размера q x n

    Returns:
        Матрица q x n; столбцы отброшенных собственных пар (λ_i <= порога) нулевые
    """
    if not spectrum.has_vectors:
        raise MissingEigenvectors("Для продолжения Нистрёма нужны собственные векторы")
    if spectrum.scale != SpectrumScale.MATRIX:
        raise ScaleMismatch("Ожидался спектр матрицы K^(n)")
    k_cross = np.atleast_2d(np.asarray(k_cross, dtype=float))
    n = spectrum.eigenvectors.shape[0]
    if k_cross.shape[1] != n:
        raise DimensionMismatch(f"Ожидалось {n} столбцов в k(z, D_n), получено {k_cross.shape[1]}")

    keep = retained_mask(spectrum)
    projected = k_cross @ spectrum.eigenvectors
    scale = np.zeros(spectrum.size)
    scale[keep] = np.sqrt(n) / spectrum.eigenvalues[keep]
    return projected * scale
