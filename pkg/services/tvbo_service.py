import logging
from typing import List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from models.data import Dataset, RegretTrace, TVBOConfig
from models.spectrum import TimeGrid
from services.gp_service import GPPosterior, sample_prior_path
from utils.errors import DomainError
from utils.pool import run_pool

logger = logging.getLogger(__name__)


def beta_schedule(i: int, confidence: float, dim: int, lipschitz: float) -> float:
    """
    β_i = 2d log(L d i² / (6δ)) + 4 log(π i).

    Значение возвращается как есть и может быть отрицательным при малых i;
    ucb_select обрезает его до нуля.

    Args:
        i: Номер итерации (>= 1)
        confidence: δ из (0, 1)
        dim: Размерность d
        lipschitz: Константа Липшица L

    Returns:
        β_i
    """
    if i < 1:
        raise DomainError(f"Номер итерации должен быть >= 1, получено {i}")
    if not 0 < confidence < 1:
        raise DomainError(f"δ должно лежать в (0, 1), получено {confidence}")
    if dim <= 0 or lipschitz <= 0:
        raise DomainError("d и L должны быть положительны")
    return 2 * dim * np.log(lipschitz * dim * i * i / (6 * confidence)) + 4 * np.log(np.pi * i)


def spatial_grid(m: int, dim: int) -> NDArray[np.float64]:
    """Равномерная сетка m^d точек на [0, 1]^d в лексикографическом порядке"""
    if m < 2:
        raise DomainError("Разрешение сетки должно быть >= 2")
    axes = np.meshgrid(*([np.linspace(0.0, 1.0, m)] * dim), indexing="ij")
    return np.stack([axis.ravel() for axis in axes], axis=1)


def ucb_select(posterior: GPPosterior, t_next: float, beta: float, grid: NDArray[np.float64]) -> Tuple[int, float]:
    """
    Выбор точки сетки по GP-UCB: argmax μ + √β σ.

    Args:
        posterior: Текущий апостериорный GP
        t_next: Следующий момент времени
        beta: β (отрицательное обрезается до 0)
        grid: Пространственная сетка

    Returns:
        (индекс выбранной точки, σ в этой точке); при равенстве берется меньший индекс
    """
    mean, variance = posterior.predict_marginals(grid, t_next)
    sigma = np.sqrt(variance)
    acquisition = mean + np.sqrt(max(beta, 0.0)) * sigma
    index = int(np.argmax(acquisition))
    return index, float(sigma[index])


def run_tvbo(config: TVBOConfig) -> RegretTrace:
    """
    Один запуск TVBO: f̄ выбирается один раз, далее GP-UCB на каждом шаге t_i = iΔ.

    Args:
        config: Параметры запуска

    Returns:
        RegretTrace с мгновенными сожалениями
    """
    grid = spatial_grid(config.grid_resolution, config.dim)
    time_grid = TimeGrid(config.horizon, config.delta)
    path_seed, noise_seed = np.random.SeedSequence(config.seed).spawn(2)
    f_bar = sample_prior_path(config.spatial, config.temporal, grid, time_grid, path_seed)
    noise_rng = np.random.default_rng(noise_seed)
    noise_sd = np.sqrt(config.noise)

    n = config.horizon
    chosen_index = np.zeros(n, dtype=np.int64)
    optimal_index = np.zeros(n, dtype=np.int64)
    observations = np.zeros(n)
    betas = np.zeros(n)
    sigmas = np.zeros(n)

    gp = GPPosterior(config.spatial, config.temporal, Dataset.empty(config.dim, config.noise))
    times = time_grid.times
    for step in range(n):
        i = step + 1
        betas[step] = beta_schedule(i, config.confidence, config.dim, config.lipschitz)
        index, sigma = ucb_select(gp, times[step], betas[step], grid)
        chosen_index[step] = index
        sigmas[step] = sigma
        optimal_index[step] = int(np.argmax(f_bar[:, step]))

        observations[step] = f_bar[index, step] + noise_sd * noise_rng.standard_normal()
        gp = gp.extend(grid[index], times[step], observations[step])

    columns = np.arange(n)
    trace = RegretTrace(
        times=times,
        chosen=grid[chosen_index],
        chosen_index=chosen_index,
        optimal=grid[optimal_index],
        optimal_index=optimal_index,
        f_chosen=f_bar[chosen_index, columns],
        f_optimal=f_bar[optimal_index, columns],
        observations=observations,
        betas=betas,
        sigmas=sigmas,
        seed=config.seed,
    )
    logger.info(f"Запуск TVBO (seed={config.seed}, {config.temporal.label}): R_n = {trace.total:.4f} за {n} шагов")
    return trace


def run_replications(config: TVBOConfig, seeds: Sequence[int], jobs: int = 1) -> List[RegretTrace]:
    """Независимые повторы по зернам; результаты упорядочены как seeds"""
    return run_pool(lambda seed: run_tvbo(config.model_copy(update={"seed": seed})), seeds, jobs)


def instantaneous_bound(trace: RegretTrace) -> NDArray[np.float64]:
    """Пошаговая граница 2 β_i^{1/2} σ_{i-1}(x_i, t_i) + 1/i²"""
    i = np.arange(1, trace.n + 1)
    return 2 * np.sqrt(np.maximum(trace.betas, 0.0)) * trace.sigmas + 1.0 / (i * i)
