"""
Модели стационарных корреляционных функций.

Ядра неизменяемы (frozen pydantic-модели), поэтому безопасны при
одновременном использовании из нескольких потоков и сериализуются
в JSON вида {"family": ..., <параметры>}.
"""
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import LOWRANK_SUM_TOLERANCE

MATERN_ORDERS = (0.5, 1.5, 2.5)


class TemporalFamily(str, Enum):
    RBF = "rbf"
    MATERN = "matern"
    RATIONAL_QUADRATIC = "rational_quadratic"
    SINC = "sinc"
    SINC_SQUARED = "sinc_squared"
    PERIODIC = "periodic"
    COSINE_SUM = "cosine_sum"


class SpatialFamily(str, Enum):
    RBF = "rbf"
    MATERN = "matern"


class KernelClassTag(str, Enum):
    BROADBAND = "broadband"  # Неограниченный непрерывный носитель
    BAND_LIMITED = "band_limited"  # Ограниченный непрерывный носитель
    ALMOST_PERIODIC = "almost_periodic"  # Неограниченный дискретный носитель
    LOW_RANK = "low_rank"  # Ограниченный дискретный носитель


# (ограничен, дискретен) -> класс
SUPPORT_TO_CLASS = {
    (False, False): KernelClassTag.BROADBAND,
    (True, False): KernelClassTag.BAND_LIMITED,
    (False, True): KernelClassTag.ALMOST_PERIODIC,
    (True, True): KernelClassTag.LOW_RANK,
}


class KernelClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: KernelClassTag
    support_bounded: bool
    support_discrete: bool

    @classmethod
    def from_support(cls, bounded: bool, discrete: bool) -> "KernelClass":
        return cls(tag=SUPPORT_TO_CLASS[(bounded, discrete)], support_bounded=bounded, support_discrete=discrete)

    @property
    def is_discrete(self) -> bool:
        return self.support_discrete

    @model_validator(mode="after")
    def _check_bijection(self):
        if SUPPORT_TO_CLASS[(self.support_bounded, self.support_discrete)] != self.tag:
            raise ValueError(f"Класс {self.tag.value} не соответствует типу носителя")
        return self


class TemporalKernel(BaseModel):
    """
    Временная корреляционная функция k_T с k_T(0) = 1.

    Параметры, не относящиеся к семейству, должны оставаться None.
    Для COSINE_SUM веса линий (включая линию на нулевой частоте) суммируются в 1.
    """
    model_config = ConfigDict(frozen=True)

    family: TemporalFamily
    lengthscale: Optional[float] = Field(default=None, gt=0)
    nu: Optional[float] = None  # Порядок Матерна
    alpha: Optional[float] = Field(default=None, gt=0)  # Параметр формы RQ
    bandlimit: Optional[float] = Field(default=None, gt=0)  # τ для Sinc/SincSquared
    period: Optional[float] = Field(default=None, gt=0)  # r для Periodic
    lines: Optional[Tuple[Tuple[float, float], ...]] = None  # (частота, вес) для CosineSum

    @model_validator(mode="after")
    def _check_family_params(self):
        family = self.family

        if family in (TemporalFamily.RBF, TemporalFamily.MATERN, TemporalFamily.RATIONAL_QUADRATIC,
                      TemporalFamily.PERIODIC) and self.lengthscale is None:
            raise ValueError(f"Для семейства {family.value} требуется lengthscale")

        if family == TemporalFamily.MATERN and self.nu not in MATERN_ORDERS:
            raise ValueError(f"Порядок Матерна nu должен быть одним из {MATERN_ORDERS}")

        if family in (TemporalFamily.SINC, TemporalFamily.SINC_SQUARED) and self.bandlimit is None:
            raise ValueError(f"Для семейства {family.value} требуется bandlimit")

        if family == TemporalFamily.PERIODIC and self.period is None:
            raise ValueError("Для периодического ядра требуется period")

        if family == TemporalFamily.COSINE_SUM:
            if not self.lines:
                raise ValueError("Для ядра cosine_sum требуется непустой список lines")
            frequencies = [frequency for frequency, _ in self.lines]
            if len(set(frequencies)) != len(frequencies):
                raise ValueError("Частоты линий cosine_sum должны быть различны")
            for frequency, weight in self.lines:
                if frequency < 0:
                    raise ValueError("Частоты линий должны быть неотрицательны")
                if not 0 < weight <= 1:
                    raise ValueError("Веса линий должны лежать в (0, 1]")
            total = sum(weight for _, weight in self.lines)
            if abs(total - 1.0) > LOWRANK_SUM_TOLERANCE:
                raise ValueError(f"Сумма весов линий должна быть 1, получено {total}")
        return self

    @property
    def shape(self) -> float:
        """Параметр формы RQ (по умолчанию 1)"""
        return 1.0 if self.alpha is None else self.alpha

    @property
    def label(self) -> str:
        return self.family.value


class SpatialKernel(BaseModel):
    """Пространственная корреляционная функция на S = [0, 1]^d"""
    model_config = ConfigDict(frozen=True)

    family: SpatialFamily
    lengthscales: Tuple[float, ...]
    dim: int = Field(default=1, gt=0)
    nu: Optional[float] = None

    @field_validator("lengthscales")
    @classmethod
    def _check_lengthscales(cls, value):
        if not value or any(scale <= 0 for scale in value):
            raise ValueError("Масштабы длины должны быть положительны")
        return value

    @model_validator(mode="after")
    def _check_dim(self):
        if len(self.lengthscales) not in (1, self.dim):
            raise ValueError(f"Ожидалось 1 или {self.dim} масштабов длины, получено {len(self.lengthscales)}")
        if self.family == SpatialFamily.MATERN and self.nu not in MATERN_ORDERS:
            raise ValueError(f"Порядок Матерна nu должен быть одним из {MATERN_ORDERS}")
        return self

    @property
    def scales(self) -> Tuple[float, ...]:
        """Масштабы по каждой координате"""
        if len(self.lengthscales) == self.dim:
            return self.lengthscales
        return self.lengthscales * self.dim


class LowRankKernel(BaseModel):
    """
    k̃(u) = c_0 + Σ_j c_j cos(2π ω_j u).

    Коэффициенты c_j могут быть отрицательны (DCT на несоизмеримой сетке):
    такое ядро воспроизводит отсчеты, но не является неотрицательно определенным.
    """
    model_config = ConfigDict(frozen=True)

    c0: float = Field(ge=0)
    coefficients: Tuple[float, ...] = ()
    frequencies: Tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check_weights(self):
        if len(self.coefficients) != len(self.frequencies):
            raise ValueError("Число коэффициентов и частот должно совпадать")
        if any(w <= 0 for w in self.frequencies):
            raise ValueError("Частоты должны быть положительны")
        total = self.c0 + sum(self.coefficients)
        if abs(total - 1.0) > LOWRANK_SUM_TOLERANCE:
            raise ValueError(f"c_0 + Σ c_j должно равняться 1, получено {total}")
        return self

    @property
    def rank(self) -> int:
        """Число косинусных членов L"""
        return len(self.coefficients)

    @property
    def max_nonzero_eigenvalues(self) -> int:
        return 2 * self.rank + (1 if self.c0 > 0 else 0)

    @property
    def negative_mass(self) -> float:
        """Σ |c_j| по отрицательным коэффициентам, 0 для PSD-ядра"""
        return float(sum(-c for c in self.coefficients if c < 0))
