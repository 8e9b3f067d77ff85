from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from utils.errors import DomainError

# Плотная симметричная матрица ядра
SymMatrix = NDArray[np.float64]


class SpectrumScale(str, Enum):
    MATRIX = "matrix"  # Собственные значения матрицы K^(n)
    OPERATOR = "operator"  # Собственные значения ковариационного оператора (λ / n)


@dataclass(frozen=True)
class TimeGrid:
    """Равномерная временная сетка t_i = iΔ, i = 1..n"""
    n: int
    delta: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"Число отсчетов должно быть >= 1, получено {self.n}")
        if not self.delta > 0:
            raise DomainError(f"Шаг по времени должен быть > 0, получено {self.delta}")

    @property
    def times(self) -> NDArray[np.float64]:
        return self.delta * np.arange(1, self.n + 1)

    @property
    def lags(self) -> NDArray[np.float64]:
        """Сдвиги jΔ, j = 0..n-1 (первая строка матрицы Тёплица)"""
        return self.delta * np.arange(self.n)


@dataclass(frozen=True)
class Spectrum:
    """
    Невозрастающая последовательность собственных значений.

    eigenvectors хранит ортонормированные столбцы в том же порядке,
    provenance: пары индексов (i, j), 1-based, для спектра-произведения.
    """
    eigenvalues: NDArray[np.float64]
    eigenvectors: Optional[NDArray[np.float64]] = None
    scale: SpectrumScale = SpectrumScale.MATRIX
    provenance: Optional[NDArray[np.int64]] = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.eigenvalues, dtype=float)
        if values.ndim != 1:
            raise DomainError("Собственные значения должны быть одномерным массивом")
        if values.size > 1 and np.any(np.diff(values) > 0):
            raise DomainError("Собственные значения должны быть упорядочены по невозрастанию")
        object.__setattr__(self, "eigenvalues", values)

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def has_vectors(self) -> bool:
        return self.eigenvectors is not None

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0]) if self.size else 0.0

    def with_values(self, values: NDArray[np.float64], scale: Optional[SpectrumScale] = None) -> "Spectrum":
        return replace(self, eigenvalues=values, scale=scale or self.scale)


@dataclass(frozen=True)
class SampledSpectrum:
    """Выборка S_T / Δ на центрированной частотной сетке (до сортировки)"""
    frequencies: NDArray[np.float64]
    values: NDArray[np.float64]

    @property
    def spectrum(self) -> Spectrum:
        return Spectrum(np.sort(self.values)[::-1].copy())

    @property
    def frequency_span(self) -> float:
        return float(self.frequencies[-1] - self.frequencies[0])
