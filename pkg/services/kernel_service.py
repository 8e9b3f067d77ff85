import logging
from typing import Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.fft import dct
from scipy.spatial.distance import cdist
from scipy.special import gammaln, ive, kve

from config import SPECTRAL_LINE_CUTOFF
from models.kernels import (
    KernelClass,
    KernelClassTag,
    LowRankKernel,
    SpatialFamily,
    SpatialKernel,
    TemporalFamily,
    TemporalKernel,
)
from utils.errors import DimensionMismatch, DomainError, ToleranceUnreachable, WrongClass

logger = logging.getLogger(__name__)

AnyTemporal = Union[TemporalKernel, LowRankKernel]

# (ограничен носитель, дискретен носитель) по семействам
FAMILY_SUPPORT = {
    TemporalFamily.RBF: (False, False),
    TemporalFamily.MATERN: (False, False),
    TemporalFamily.RATIONAL_QUADRATIC: (False, False),
    TemporalFamily.SINC: (True, False),
    TemporalFamily.SINC_SQUARED: (True, False),
    TemporalFamily.PERIODIC: (False, True),
    TemporalFamily.COSINE_SUM: (True, True),
}


def _as_output(values: NDArray[np.float64], like) -> Union[float, NDArray[np.float64]]:
    return float(values) if np.ndim(like) == 0 else values


def _matern(r: NDArray[np.float64], nu: float) -> NDArray[np.float64]:
    """Матерн полуцелого порядка от масштабированного расстояния r = |u| / ℓ"""
    if nu == 0.5:
        return np.exp(-r)
    if nu == 1.5:
        s = np.sqrt(3.0) * r
        return (1.0 + s) * np.exp(-s)
    s = np.sqrt(5.0) * r
    return (1.0 + s + s * s / 3.0) * np.exp(-s)


def eval_temporal(kernel: AnyTemporal, u: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """
    Вычисляет k_T(u) для скаляра или массива сдвигов.

    Args:
        kernel: Временное ядро (или низкоранговое приближение)
        u: Сдвиг по времени

    Returns:
        Значение корреляции в [-1, 1] той же формы, что и u
    """
    lag = np.asarray(u, dtype=float)

    if isinstance(kernel, LowRankKernel):
        values = np.full(lag.shape, kernel.c0)
        for c, w in zip(kernel.coefficients, kernel.frequencies):
            values = values + c * np.cos(2 * np.pi * w * lag)
        return _as_output(values, u)

    family = kernel.family

    if family == TemporalFamily.RBF:
        values = np.exp(-lag * lag / (2 * kernel.lengthscale ** 2))
    elif family == TemporalFamily.MATERN:
        values = _matern(np.abs(lag) / kernel.lengthscale, kernel.nu)
    elif family == TemporalFamily.RATIONAL_QUADRATIC:
        alpha = kernel.shape
        values = (1.0 + lag * lag / (2 * alpha * kernel.lengthscale ** 2)) ** (-alpha)
    elif family == TemporalFamily.SINC:
        # np.sinc(x) = sin(πx) / (πx), предел 1 в нуле
        values = np.sinc(2 * kernel.bandlimit * lag)
    elif family == TemporalFamily.SINC_SQUARED:
        values = np.sinc(kernel.bandlimit * lag) ** 2
    elif family == TemporalFamily.PERIODIC:
        values = np.exp(-2 * np.sin(np.pi * lag / kernel.period) ** 2 / kernel.lengthscale ** 2)
    else:
        values = np.zeros(lag.shape)
        for frequency, weight in kernel.lines:
            values = values + weight * np.cos(2 * np.pi * frequency * lag)

    return _as_output(values, u)


def eval_spatial(kernel: SpatialKernel, X: ArrayLike, X2: ArrayLike = None) -> NDArray[np.float64]:
    """
    Матрица пространственных корреляций k_S(X, X2).

    Args:
        kernel: Пространственное ядро
        X: Точки (n x d)
        X2: Точки (m x d), по умолчанию X

    Returns:
        Матрица n x m
    """
    A = np.atleast_2d(np.asarray(X, dtype=float))
    B = A if X2 is None else np.atleast_2d(np.asarray(X2, dtype=float))
    for points in (A, B):
        if points.shape[1] != kernel.dim:
            raise DimensionMismatch(f"Ожидалась пространственная размерность {kernel.dim}, получено {points.shape[1]}")

    scales = np.asarray(kernel.scales)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((A.shape[0], B.shape[0]))
    r = cdist(A / scales, B / scales)

    if kernel.family == SpatialFamily.RBF:
        return np.exp(-0.5 * r * r)
    return _matern(r, kernel.nu)


def classify(kernel: TemporalKernel) -> KernelClass:
    """Определяет класс ядра по ограниченности и дискретности носителя S_T"""
    bounded, discrete = FAMILY_SUPPORT[kernel.family]
    return KernelClass.from_support(bounded, discrete)


def _rq_density(omega: NDArray[np.float64], lengthscale: float, alpha: float) -> NDArray[np.float64]:
    # Смесь гауссиан по гамма-распределению точности
    beta = alpha * lengthscale ** 2
    order = alpha - 0.5
    c = 2 * np.pi ** 2 * beta * omega * omega
    density = np.empty_like(omega)

    at_zero = c == 0
    if np.any(at_zero):
        if alpha > 0.5:
            density[at_zero] = np.sqrt(2 * np.pi * beta) * np.exp(gammaln(order) - gammaln(alpha))
        else:
            density[at_zero] = np.inf

    positive = ~at_zero
    if np.any(positive):
        cp = c[positive]
        z = 2 * np.sqrt(cp)
        log_density = (
            0.5 * np.log(2 * np.pi * beta)
            - gammaln(alpha)
            + np.log(2.0)
            + 0.5 * order * np.log(cp)
            + np.log(kve(order, z))
            - z
        )
        density[positive] = np.exp(log_density)
    return density


def spectral_density(kernel: TemporalKernel, omega: ArrayLike):
    """
    Спектральная плотность S_T(ω) = ∫ k_T(u) exp(-2πiωu) du.

    Args:
        kernel: Временное ядро
        omega: Частота (скаляр или массив)

    Returns:
        Для непрерывного носителя: значения S_T(ω);
        для дискретного: полный список линий (частоты, веса), ω игнорируется
    """
    if classify(kernel).is_discrete:
        return spectral_lines(kernel)

    w = np.asarray(omega, dtype=float)
    family = kernel.family

    if family == TemporalFamily.RBF:
        ell = kernel.lengthscale
        values = ell * np.sqrt(2 * np.pi) * np.exp(-2 * np.pi ** 2 * ell ** 2 * w * w)
    elif family == TemporalFamily.MATERN:
        nu, ell = kernel.nu, kernel.lengthscale
        log_const = (
            np.log(2 * np.sqrt(np.pi)) + gammaln(nu + 0.5) - gammaln(nu)
            + nu * np.log(2 * nu) - 2 * nu * np.log(ell)
        )
        values = np.exp(log_const) * (2 * nu / ell ** 2 + 4 * np.pi ** 2 * w * w) ** (-(nu + 0.5))
    elif family == TemporalFamily.RATIONAL_QUADRATIC:
        values = _rq_density(np.atleast_1d(w).astype(float), kernel.lengthscale, kernel.shape).reshape(w.shape)
    elif family == TemporalFamily.SINC:
        tau = kernel.bandlimit
        # Полуоткрытая полоса (-τ, τ]
        values = np.where((w > -tau) & (w <= tau), 1.0 / (2 * tau), 0.0)
    else:
        tau = kernel.bandlimit
        values = np.clip(1.0 - np.abs(w) / tau, 0.0, None) / tau

    return _as_output(values, omega)


def spectral_lines(kernel: AnyTemporal) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Двусторонний список спектральных линий дискретного ядра.

    Returns:
        (частоты по возрастанию, веса), веса в сумме дают 1
    """
    if isinstance(kernel, LowRankKernel):
        pairs = [(0.0, kernel.c0)] if kernel.c0 > 0 else []
        pairs += [(w, c) for w, c in zip(kernel.frequencies, kernel.coefficients)]
    elif kernel.family == TemporalFamily.COSINE_SUM:
        pairs = list(kernel.lines)
    elif kernel.family == TemporalFamily.PERIODIC:
        z = 1.0 / kernel.lengthscale ** 2
        pairs = [(0.0, float(ive(0, z)))]
        p = 1
        while True:
            weight = float(ive(p, z))
            if weight < SPECTRAL_LINE_CUTOFF:
                break
            pairs.append((p / kernel.period, 2 * weight))
            p += 1
    else:
        raise WrongClass("spectral_lines", classify(kernel).tag.value)

    frequencies, weights = [], []
    for frequency, weight in pairs:
        if frequency == 0:
            frequencies.append(0.0)
            weights.append(weight)
        else:
            frequencies.extend([-frequency, frequency])
            weights.extend([weight / 2, weight / 2])
    order = np.argsort(frequencies, kind="stable")
    return np.asarray(frequencies)[order], np.asarray(weights)[order]


def to_low_rank(kernel: TemporalKernel) -> LowRankKernel:
    """Представляет ядро CosineSum как LowRankKernel без изменений"""
    if kernel.family != TemporalFamily.COSINE_SUM:
        raise WrongClass("to_low_rank", classify(kernel).tag.value)
    c0 = sum(weight for frequency, weight in kernel.lines if frequency == 0)
    terms = sorted((frequency, weight) for frequency, weight in kernel.lines if frequency > 0)
    return LowRankKernel(
        c0=c0,
        coefficients=tuple(weight for _, weight in terms),
        frequencies=tuple(frequency for frequency, _ in terms),
    )


def _from_terms(c0: float, coefficients: NDArray[np.float64], frequencies: NDArray[np.float64]) -> LowRankKernel:
    total = c0 + coefficients.sum()
    order = np.argsort(frequencies, kind="stable")
    return LowRankKernel(
        c0=float(c0 / total),
        coefficients=tuple(float(c) for c in coefficients[order] / total),
        frequencies=tuple(float(w) for w in frequencies[order]),
    )


def truncate_lines(kernel: TemporalKernel, tolerance: float) -> LowRankKernel:
    """
    Оставляет самые тяжелые спектральные линии, пока отброшенная масса не превышает tolerance.

    Гарантия: sup_u |k_T(u) - k̃(u)| <= 2 * tolerance на всей прямой.
    """
    if tolerance <= 0:
        raise DomainError("Допуск должен быть положительным")
    if classify(kernel).tag != KernelClassTag.ALMOST_PERIODIC:
        raise WrongClass("truncate_lines", classify(kernel).tag.value)

    frequencies, weights = spectral_lines(kernel)
    positive = frequencies >= 0
    one_sided_freq = frequencies[positive]
    one_sided_weight = np.where(one_sided_freq == 0, weights[positive], 2 * weights[positive])

    order = np.argsort(one_sided_weight, kind="stable")
    dropped_mass = np.cumsum(one_sided_weight[order])
    n_drop = min(int(np.searchsorted(dropped_mass, tolerance, side="right")), order.size - 1)
    keep = np.sort(order[n_drop:])

    kept_freq, kept_weight = one_sided_freq[keep], one_sided_weight[keep]
    c0 = float(kept_weight[kept_freq == 0].sum())
    cosine = kept_freq > 0
    logger.debug(f"Оставлено {int(cosine.sum())} косинусов, отброшенная масса {dropped_mass[n_drop - 1] if n_drop else 0.0:.2e}")
    return _from_terms(c0, kept_weight[cosine], kept_freq[cosine])


def _dct_coefficients(samples: NDArray[np.float64]) -> NDArray[np.float64]:
    """Коэффициенты c_p разложения s_j = Σ_p c_p cos(πpj / (n-1))"""
    n = samples.size
    N = 2 * (n - 1)
    X = dct(samples, type=1)
    coefficients = 2 * X / N
    coefficients[0] /= 2
    coefficients[-1] /= 2
    return coefficients


def _grid_residual(samples, basis, coefficients, mask) -> float:
    kept = coefficients * mask
    total = kept.sum()
    if total <= 0:
        return np.inf
    return float(np.max(np.abs(samples - basis @ (kept / total))))


def low_rank_approx(
    kernel: TemporalKernel,
    delta: float,
    n: int,
    tolerance: float,
    truncate: bool = True,
    method: str = "dct",
) -> LowRankKernel:
    """
    Низкоранговое приближение почти-периодического ядра на сетке jΔ.

    Args:
        kernel: Почти-периодическое ядро (CosineSum возвращается без изменений)
        delta: Шаг по времени Δ
        n: Число отсчетов
        tolerance: Допуск ε на sup-невязку по отсчетам
        truncate: Отбрасывать коэффициенты от меньших к большим, пока невязка <= ε
        method: "dct" (по отсчетам) или "lines" (по спектральным линиям)

    Returns:
        LowRankKernel с |k_T(jΔ) - k̃(jΔ)| <= ε для j = 0..n-1. При несоизмеримом шаге
        коэффициенты DCT бывают отрицательны: они сохраняются, а их сумма
        доступна как negative_mass
    """
    if kernel.family == TemporalFamily.COSINE_SUM:
        return to_low_rank(kernel)
    if classify(kernel).tag != KernelClassTag.ALMOST_PERIODIC:
        raise WrongClass("low_rank_approx", classify(kernel).tag.value)
    if n < 2:
        raise DomainError("Для приближения требуется n >= 2")
    if tolerance <= 0:
        raise DomainError("Допуск должен быть положительным")
    if method == "lines":
        return truncate_lines(kernel, tolerance)
    if method != "dct":
        raise DomainError(f"Неизвестный метод приближения: {method}")

    samples = eval_temporal(kernel, delta * np.arange(n))
    coefficients = _dct_coefficients(samples)
    frequencies = np.arange(n) / (2 * (n - 1) * delta)
    basis = np.cos(np.pi * np.outer(np.arange(n), np.arange(n)) / (n - 1))

    # Полный набор коэффициентов со знаками воспроизводит отсчеты точно
    mask = np.ones(n, dtype=bool)
    residual = _grid_residual(samples, basis, coefficients, mask)
    if not residual <= tolerance:
        raise ToleranceUnreachable(residual, tolerance)

    if truncate:
        for p in np.argsort(np.abs(coefficients), kind="stable"):
            mask[p] = False
            if not _grid_residual(samples, basis, coefficients, mask) <= tolerance:
                mask[p] = True
                break

    # Нулевые члены не входят в ранг
    mask &= coefficients != 0
    kept = np.where(mask, coefficients, 0.0)
    approx = _from_terms(kept[0], kept[1:][mask[1:]], frequencies[1:][mask[1:]])
    if approx.negative_mass > 0:
        logger.warning(
            f"DCT-приближение со знакопеременными коэффициентами: отрицательная масса {approx.negative_mass:.3e}, "
            f"ядро не является неотрицательно определенным"
        )
    logger.info(f"DCT-приближение: {approx.rank} косинусов, c_0 = {approx.c0:.6f}")
    return approx
