import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import norm

from models.data import BoundReport, LowerBoundStep, RegretTrace, ScalingRow, TVBOConfig
from models.kernels import SpatialKernel
from models.spectrum import Spectrum, SpectrumScale, SymMatrix, TimeGrid
from services.gp_service import cross_kernel, effective_noise
from services.kernel_service import AnyTemporal, eval_spatial
from services.spectral_service import (
    approx_product_spectrum,
    build_spatiotemporal_matrix,
    build_temporal_matrix,
    clip_negative,
    count_in_interval,
    count_positive,
    eig_sym,
    nystrom_eigenfunctions,
    operator_spectrum,
    retained_mask,
)
from utils.errors import DomainError, InsufficientData, ScaleMismatch

logger = logging.getLogger(__name__)

# Верхняя граница σ̂² при отброшенной ковариации: σ²(z*) + σ²(z) <= 2
SIGMA_HAT_SQ_MAX = 2.0


def _check_noise(noise: float):
    if noise <= 0:
        raise DomainError(f"Дисперсия шума должна быть > 0, получено {noise}")


def mutual_info_exact(K: SymMatrix, noise: float) -> float:
    """
    I = ½ log det(I + σ₀⁻² K), через собственные значения K.

    Args:
        K: Матрица ядра
        noise: σ₀²

    Returns:
        Взаимная информация (>= 0)
    """
    _check_noise(noise)
    if np.size(K) == 0:
        return 0.0
    return mutual_info_from_spectrum(eig_sym(K, want_vectors=False), noise)


def mutual_info_from_spectrum(spectrum: Spectrum, noise: float) -> float:
    """½ Σ log(1 + σ₀⁻² λ_i) по спектру матрицы K"""
    _check_noise(noise)
    if spectrum.scale != SpectrumScale.MATRIX:
        raise ScaleMismatch("Ожидался спектр матрицы K^(n)")
    values = clip_negative(spectrum).eigenvalues
    return float(0.5 * np.sum(np.log1p(values / noise)))


def mutual_info_spectral(spectrum: Spectrum, n: int, noise: float) -> float:
    """I ≈ ½ Σ_{i<=n} log(1 + σ₀⁻² n λ̄_i) по спектру оператора"""
    _check_noise(noise)
    if spectrum.scale != SpectrumScale.OPERATOR:
        raise ScaleMismatch("mutual_info_spectral ожидает спектр в масштабе оператора")
    values = np.maximum(spectrum.eigenvalues[:n], 0.0)
    return float(0.5 * np.sum(np.log1p(n * values / noise)))


def mutual_info_trajectory(variances: ArrayLike, noise: float) -> float:
    """Последовательная форма: ½ Σ_i log(1 + σ₀⁻² σ²_{i-1}(x_i, t_i))"""
    _check_noise(noise)
    return float(0.5 * np.sum(np.log1p(np.asarray(variances, dtype=float) / noise)))


def c1_constant(noise: float) -> float:
    """C₁ = σ₀⁻² / log(1 + σ₀⁻²)"""
    _check_noise(noise)
    return float((1.0 / noise) / np.log1p(1.0 / noise))


def c1_violation_fraction(sigmas: ArrayLike, noise: float) -> float:
    """Доля шагов, где σ_{i-1}(x_i, t_i) > σ₀"""
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.size == 0:
        return 0.0
    return float(np.mean(sigmas > np.sqrt(noise)))


def upper_bound(n: int, beta: float, noise: float, info: float, c1: Optional[float] = None) -> float:
    """
    R_n <= √(8 C₁ β_n σ₀² n I) + π²/6.

    Args:
        n: Число итераций
        beta: β_n (отрицательное обрезается до 0)
        noise: σ₀²
        info: Взаимная информация I(f_n, y_n)
        c1: C₁, по умолчанию c1_constant(noise)

    Returns:
        Значение верхней границы
    """
    if n < 0 or info < 0:
        raise DomainError("n и I должны быть неотрицательны")
    c1 = c1_constant(noise) if c1 is None else c1
    return float(np.sqrt(8 * c1 * max(beta, 0.0) * noise * n * info) + np.pi ** 2 / 6)


def truncated_gaussian_mean(mu_hat: ArrayLike, sigma_hat: ArrayLike):
    """
    E[max(0, X)] для X ~ N(μ̂, σ̂²): μ̂Φ(μ̂/σ̂) + σ̂φ(μ̂/σ̂).

    При σ̂ = 0 возвращает max(0, μ̂).
    """
    mu = np.asarray(mu_hat, dtype=float)
    sigma = np.asarray(sigma_hat, dtype=float)
    if np.any(sigma < 0):
        raise DomainError("σ̂ должно быть неотрицательным")
    scalar = mu.ndim == 0 and sigma.ndim == 0
    mu, sigma = np.broadcast_arrays(np.atleast_1d(mu), np.atleast_1d(sigma))
    result = np.array(np.maximum(mu, 0.0), dtype=float)
    positive = sigma > 0
    ratio = mu[positive] / sigma[positive]
    result[positive] = mu[positive] * norm.cdf(ratio) + sigma[positive] * norm.pdf(ratio)
    return float(result[0]) if scalar else result


def prefix_spectra(spatial: SpatialKernel, temporal: AnyTemporal, X: ArrayLike, t: ArrayLike) -> Iterator[Spectrum]:
    """Спектры (с векторами) ведущих главных подматриц K^(k), k = 1..n"""
    K = build_spatiotemporal_matrix(spatial, temporal, X, t)
    for k in range(1, K.shape[0] + 1):
        yield eig_sym(K[:k, :k])


@dataclass(frozen=True)
class LowerBoundResult:
    steps: List[LowerBoundStep]

    @property
    def terms(self) -> NDArray[np.float64]:
        return np.array([step.term for step in self.steps])

    @property
    def total(self) -> float:
        return float(self.terms.sum())

    @property
    def clipped_steps(self) -> int:
        return sum(step.clipped for step in self.steps)


def lower_bound(
    trace: RegretTrace,
    spatial: SpatialKernel,
    temporal: AnyTemporal,
    spectra: Optional[Sequence[Spectrum]] = None,
) -> LowerBoundResult:
    """
    Нижняя граница ожидаемого сожаления через усеченные гауссовы моменты.

    На шаге i используются собственные пары K^(i-1) по уже выбранным точкам:
    μ̂ = μ(z*_i) - μ(z_i) и σ̂² = σ²(z*_i) + σ²(z_i) в приближении Мерсера
    (собственные функции вне выборки берутся продолжением Нистрёма). σ̂² обрезается до [0, 2].
    Шаг 1 (пустые суммы): μ̂ = 0, σ̂² = 2.

    Args:
        trace: Траектория запуска
        spatial: Пространственное ядро
        temporal: Временное ядро
        spectra: Готовые спектры K^(k), k = 1..n-1 (иначе вычисляются)

    Returns:
        LowerBoundResult с пошаговыми слагаемыми
    """
    n = trace.n
    if n == 0:
        raise InsufficientData("Траектория пуста")
    if spectra is None:
        spectra = list(prefix_spectra(spatial, temporal, trace.chosen[: n - 1], trace.times[: n - 1]))

    steps = [LowerBoundStep(
        iteration=1,
        mu_hat=0.0,
        sigma_hat=float(np.sqrt(SIGMA_HAT_SQ_MAX)),
        full_variance=SIGMA_HAT_SQ_MAX,
        term=float(truncated_gaussian_mean(0.0, np.sqrt(SIGMA_HAT_SQ_MAX))),
    )]

    for step in range(1, n):
        k = step
        spectrum = spectra[k - 1]
        X_past, t_past = trace.chosen[:k], trace.times[:k]
        f_past = trace.f_chosen[:k]
        queries = np.vstack([trace.optimal[step], trace.chosen[step]])
        t_now = np.full(2, trace.times[step])

        phi = nystrom_eigenfunctions(spectrum, cross_kernel(spatial, temporal, queries, t_now, X_past, t_past))
        phi_samples = np.sqrt(k) * spectrum.eigenvectors
        operator_values = np.maximum(spectrum.eigenvalues, 0.0) / k

        means = phi @ (phi_samples.T @ f_past) / k
        variances = 1.0 - (phi * phi) @ operator_values
        mu_hat = float(means[0] - means[1])

        raw = float(variances.sum())
        sigma_sq = float(np.clip(raw, 0.0, SIGMA_HAT_SQ_MAX))
        clipped = raw != sigma_sq

        covariance = float(eval_spatial(spatial, queries[:1], queries[1:])[0, 0]) - float(
            (phi[0] * phi[1]) @ operator_values
        )
        full_variance = max(raw - 2 * covariance, 0.0)

        steps.append(LowerBoundStep(
            iteration=step + 1,
            mu_hat=mu_hat,
            sigma_hat=float(np.sqrt(sigma_sq)),
            full_variance=full_variance,
            term=float(truncated_gaussian_mean(mu_hat, np.sqrt(sigma_sq))),
            clipped=clipped,
        ))

    result = LowerBoundResult(steps)
    if result.clipped_steps:
        logger.warning(f"σ̂² обрезано до [0, 2] на {result.clipped_steps} шагах из {n}")
    return result


def lowrank_information_cap(
    spatial_operator: Spectrum,
    temporal_operator: Spectrum,
    n: int,
    noise: float,
    rank: Optional[int] = None,
) -> float:
    """
    Сублинейная оценка взаимной информации для временного ядра ранга L:
    L Σ_{i <= ⌈n/L⌉} log(1 + σ₀⁻² n λ̄^S_i λ̄^T_1).
    """
    _check_noise(noise)
    for spectrum in (spatial_operator, temporal_operator):
        if spectrum.scale != SpectrumScale.OPERATOR:
            raise ScaleMismatch("Ожидались спектры в масштабе оператора")
    rank = count_positive(temporal_operator) if rank is None else rank
    if rank < 1:
        return 0.0
    top_temporal = max(temporal_operator.lambda_max, 0.0)
    head = np.maximum(spatial_operator.eigenvalues[: int(np.ceil(n / rank))], 0.0)
    return float(rank * np.sum(np.log1p(n * head * top_temporal / noise)))


def bound_report(
    trace: RegretTrace,
    config: TVBOConfig,
    spectra: Optional[Sequence[Spectrum]] = None,
) -> BoundReport:
    """
    Сводный отчет о границах для одной траектории.

    Args:
        trace: Траектория запуска
        config: Конфигурация запуска
        spectra: Спектры K^(k), k = 1..n (последний для полной матрицы)

    Returns:
        BoundReport
    """
    n = trace.n
    if n == 0:
        raise InsufficientData("Траектория пуста")
    if spectra is None:
        spectra = list(prefix_spectra(config.spatial, config.temporal, trace.chosen, trace.times))

    noise = effective_noise(config.noise)
    full = clip_negative(spectra[-1])
    info_exact = mutual_info_from_spectrum(full, noise)
    info_spectral = mutual_info_spectral(operator_spectrum(full, n), n, noise)
    info_trajectory = mutual_info_trajectory(trace.sigmas ** 2, noise)

    c1 = c1_constant(noise)
    cumulative_info = 0.5 * np.cumsum(np.log1p(trace.sigmas ** 2 / noise))
    upper_curve = [
        upper_bound(i + 1, float(trace.betas[i]), noise, float(cumulative_info[i]), c1) for i in range(n)
    ]
    regret_curve = trace.cumulative.tolist()
    violation = c1_violation_fraction(trace.sigmas, noise)
    if violation > 0:
        logger.warning(f"Условие σ <= σ₀ для C₁ нарушено на {violation:.0%} шагов")

    lower = lower_bound(trace, config.spatial, config.temporal, spectra[: n - 1])
    return BoundReport(
        n=n,
        seed=trace.seed,
        kernel=config.temporal.label,
        cumulative_regret=trace.total,
        mutual_info_exact=info_exact,
        mutual_info_spectral=info_spectral,
        mutual_info_trajectory=info_trajectory,
        beta_n=float(trace.betas[-1]),
        c1=c1,
        upper_bound=upper_curve[-1],
        upper_curve=upper_curve,
        regret_curve=regret_curve,
        upper_holds=bool(np.all(np.asarray(regret_curve) <= np.asarray(upper_curve))),
        c1_violation_fraction=violation,
        lower_steps=lower.steps,
        lower_total=lower.total,
        sigma_clipped_steps=lower.clipped_steps,
    )


def _mean_stderr(values: Sequence[float]):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def scaling_diagnostic(
    spatial: SpatialKernel,
    temporal: AnyTemporal,
    n_values: Sequence[int],
    interval: Sequence[float],
    delta: float,
    noise: float,
    seeds: Sequence[int],
    label: Optional[str] = None,
) -> List[ScalingRow]:
    """
    Число собственных значений K^(n) в [a, b] и I/n для растущих n.

    Пространственные точки равномерны в [0, 1]^d, t_i = iΔ. Для каждого зерна выборки вложены:
    точки для меньшего n являются началом выборки для наибольшего n.

    Args:
        spatial: Пространственное ядро
        temporal: Временное ядро
        n_values: Возрастающий список n
        interval: (a, b)
        delta: Шаг по времени
        noise: σ₀² для I
        seeds: Зерна повторов
        label: Имя ядра в таблице

    Returns:
        Список ScalingRow, по одной строке на n
    """
    if list(n_values) != sorted(n_values):
        raise DomainError("Список n должен быть упорядочен по возрастанию")
    a, b = interval
    label = label or getattr(temporal, "label", "low_rank")
    n_max = max(n_values, default=0)
    samples = {seed: np.random.default_rng(seed).random((n_max, spatial.dim)) for seed in seeds}
    rows = []
    for n in n_values:
        grid = TimeGrid(n, delta)
        temporal_spectrum = eig_sym(build_temporal_matrix(temporal, grid), want_vectors=False)
        counts, infos, n0s = [], [], []
        for seed in seeds:
            X = samples[seed][:n]
            K = build_spatiotemporal_matrix(spatial, temporal, X, grid.times)
            spectrum = clip_negative(eig_sym(K, want_vectors=False))
            counts.append(count_in_interval(spectrum, a, b))
            infos.append(mutual_info_from_spectrum(spectrum, noise) / n)

            product = approx_product_spectrum(eig_sym(eval_spatial(spatial, X), want_vectors=False), temporal_spectrum, n)
            used = product.provenance[retained_mask(product)]
            n0s.append(len(set(used[:, 0].tolist())))

        count, count_err = _mean_stderr(counts)
        info, info_err = _mean_stderr(infos)
        rows.append(ScalingRow(
            kernel=label,
            n=n,
            count=count,
            count_stderr=count_err,
            info_per_n=info,
            info_per_n_stderr=info_err,
            n0=float(np.mean(n0s)),
            replications=len(seeds),
        ))
        logger.info(f"{label}, n = {n}: число в [{a}, {b}] = {count:.1f}, I/n = {info:.4f}")
    return rows
