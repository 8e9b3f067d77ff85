"""
Данные наблюдений, траектории оптимизации и отчеты о границах.
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.kernels import SpatialKernel, TemporalKernel
from utils.errors import DimensionMismatch, DomainError

STEP_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Dataset:
    """
    Упорядоченные наблюдения (x_i, t_i, y_i) с постоянным шагом по времени.

    Экземпляры неизменяемы: append возвращает новый набор данных.
    """
    X: NDArray[np.float64]
    t: NDArray[np.float64]
    y: NDArray[np.float64]
    noise: float = 0.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        t = np.asarray(self.t, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != t.size or t.size != y.size:
            raise DimensionMismatch(f"Несогласованные размеры: X {X.shape}, t {t.size}, y {y.size}")
        if self.noise < 0:
            raise DomainError("Дисперсия шума должна быть неотрицательна")
        if np.any(X < 0) or np.any(X > 1):
            raise DomainError("Все точки x должны лежать в единичном кубе")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise DomainError("Моменты времени должны строго возрастать")
            if np.max(np.abs(steps - steps[0])) > STEP_TOLERANCE * max(1.0, abs(steps[0])):
                raise DomainError("Шаг по времени должен быть постоянным")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)

    @classmethod
    def empty(cls, dim: int, noise: float = 0.0) -> "Dataset":
        return cls(np.empty((0, dim)), np.empty(0), np.empty(0), noise)

    @property
    def n(self) -> int:
        return int(self.t.size)

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    @property
    def delta(self) -> Optional[float]:
        return float(self.t[1] - self.t[0]) if self.n > 1 else None

    def append(self, x, t: float, y: float) -> "Dataset":
        x = np.asarray(x, dtype=float).reshape(1, -1)
        if x.shape[1] != self.dim:
            raise DimensionMismatch(f"Ожидалась размерность {self.dim}, получено {x.shape[1]}")
        return Dataset(
            np.vstack([self.X, x]),
            np.append(self.t, t),
            np.append(self.y, y),
            self.noise,
        )


@dataclass(frozen=True)
class RegretTrace:
    """
    Траектория одного запуска TVBO.

    Для каждого шага i хранятся t_i, выбранная точка x_i, оптимум сетки x_i*,
    мгновенное сожаление r_i, β_i и σ_{i-1}(x_i, t_i).
    """
    times: NDArray[np.float64]
    chosen: NDArray[np.float64]
    chosen_index: NDArray[np.int64]
    optimal: NDArray[np.float64]
    optimal_index: NDArray[np.int64]
    f_chosen: NDArray[np.float64]
    f_optimal: NDArray[np.float64]
    observations: NDArray[np.float64]
    betas: NDArray[np.float64]
    sigmas: NDArray[np.float64]
    seed: int = 0

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def regrets(self) -> NDArray[np.float64]:
        return self.f_optimal - self.f_chosen

    @property
    def cumulative(self) -> NDArray[np.float64]:
        return np.cumsum(self.regrets)

    @property
    def total(self) -> float:
        return float(self.regrets.sum())


class TVBOConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    spatial: SpatialKernel
    temporal: TemporalKernel
    delta: float = Field(gt=0)
    horizon: int = Field(ge=1)
    confidence: float = Field(gt=0, lt=1)  # δ
    lipschitz: float = Field(gt=0)  # L
    grid_resolution: int = Field(ge=2)  # m
    noise: float = Field(ge=0)  # σ₀²
    seed: int = Field(default=0, ge=0)

    @property
    def dim(self) -> int:
        return self.spatial.dim


class LowerBoundStep(BaseModel):
    iteration: int
    mu_hat: float
    sigma_hat: float
    full_variance: float
    term: float
    clipped: bool = False


class BoundReport(BaseModel):
    """Сводка границ сожаления для одной траектории"""
    n: int
    seed: int
    kernel: str
    cumulative_regret: float
    mutual_info_exact: float
    mutual_info_spectral: float
    mutual_info_trajectory: float
    beta_n: float
    c1: float
    upper_bound: float
    upper_curve: List[float]
    regret_curve: List[float]
    upper_holds: bool
    c1_violation_fraction: float
    lower_steps: List[LowerBoundStep]
    lower_total: float
    sigma_clipped_steps: int

    @model_validator(mode="after")
    def _check_nonnegative(self):
        if self.mutual_info_exact < 0:
            raise ValueError("Взаимная информация не может быть отрицательной")
        return self


class ScalingRow(BaseModel):
    """Строка таблицы масштабирования: среднее и стандартная ошибка по повторам"""
    kernel: str
    n: int
    count: float
    count_stderr: float
    info_per_n: float
    info_per_n_stderr: float
    n0: float
    replications: int
