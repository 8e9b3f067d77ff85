"""
Конфигурации экспериментов CLI.

ExperimentConfig задает идентификатор, зерно, каталог и число воркеров;
параметры конкретного эксперимента проверяются отдельной моделью
из PARAMS_MODELS поверх значений по умолчанию из config.EXPERIMENT_DEFAULTS.
"""
import copy
from enum import Enum
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import EXPERIMENT_DEFAULTS, JOBS, OUT_DIR
from models.kernels import KernelClassTag, SpatialKernel, TemporalKernel
from services.kernel_service import classify


class ExperimentId(str, Enum):
    FIG1 = "fig1"
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    TABLE1 = "table1"
    REGRET = "regret"


class _Params(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Fig1Params(_Params):
    n: int = Field(ge=2)
    delta: float = Field(gt=0)
    top: int = Field(ge=1)
    spatial: SpatialKernel
    temporal: TemporalKernel


class PanelParams(_Params):
    """Панели (n, Δ) для сравнения точного и приближенного спектра K_T"""
    temporal: TemporalKernel
    panels: List[Tuple[int, float]]

    @field_validator("temporal")
    @classmethod
    def _continuous(cls, kernel: TemporalKernel):
        if classify(kernel).is_discrete:
            raise ValueError("Требуется ядро с непрерывным носителем спектра")
        return kernel

    @field_validator("panels")
    @classmethod
    def _check_panels(cls, panels):
        if not panels:
            raise ValueError("Нужна хотя бы одна панель")
        for n, delta in panels:
            if n < 2 or delta <= 0:
                raise ValueError(f"Некорректная панель (n={n}, Δ={delta})")
        return panels


class Fig4Params(_Params):
    temporal: TemporalKernel
    divisors: List[int]
    n_values: List[int]
    tolerance: float = Field(gt=0)

    @field_validator("temporal")
    @classmethod
    def _almost_periodic(cls, kernel: TemporalKernel):
        if classify(kernel).tag != KernelClassTag.ALMOST_PERIODIC:
            raise ValueError("Требуется почти-периодическое ядро")
        return kernel

    @field_validator("divisors", "n_values")
    @classmethod
    def _positive(cls, values):
        if not values or any(v < 2 for v in values):
            raise ValueError("Значения должны быть >= 2")
        return values


class ScalingParams(_Params):
    spatial: SpatialKernel
    temporal: Dict[str, TemporalKernel]
    n_values: List[int]
    delta: float = Field(gt=0)
    interval: Tuple[float, float]
    noise: float = Field(gt=0)
    replications: int = Field(ge=1)

    @model_validator(mode="after")
    def _check(self):
        if not self.temporal:
            raise ValueError("Нужно хотя бы одно временное ядро")
        if not self.n_values or self.n_values != sorted(self.n_values) or self.n_values[0] < 1:
            raise ValueError("n_values должны быть положительными и возрастать")
        if self.interval[0] > self.interval[1]:
            raise ValueError("interval: a должно быть <= b")
        return self

    @property
    def n_max(self) -> int:
        return max(self.n_values)


class RegretParams(_Params):
    spatial: SpatialKernel
    temporal: Dict[str, TemporalKernel]
    delta: float = Field(gt=0)
    horizon: int = Field(ge=1)
    grid_resolution: int = Field(ge=2)
    noise: float = Field(gt=0)
    confidence: float = Field(gt=0, lt=1)
    lipschitz: float = Field(gt=0)
    replications: int = Field(ge=1)
    checkpoints: List[int]

    @model_validator(mode="after")
    def _check(self):
        if not self.temporal:
            raise ValueError("Нужно хотя бы одно временное ядро")
        if any(not 1 <= c <= self.horizon for c in self.checkpoints):
            raise ValueError("checkpoints должны лежать в [1, horizon]")
        return self


PARAMS_MODELS = {
    ExperimentId.FIG1: Fig1Params,
    ExperimentId.FIG2: PanelParams,
    ExperimentId.FIG3: PanelParams,
    ExperimentId.FIG4: Fig4Params,
    ExperimentId.FIG5: ScalingParams,
    ExperimentId.TABLE1: ScalingParams,
    ExperimentId.REGRET: RegretParams,
}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentId
    seed: int = Field(default=0, ge=0)
    out_dir: str = OUT_DIR
    jobs: int = Field(default=JOBS, ge=1)
    params: Dict[str, Any] = Field(default_factory=dict)

    @property
    def merged_params(self) -> Dict[str, Any]:
        merged = copy.deepcopy(EXPERIMENT_DEFAULTS[self.experiment.value])
        merged.update(self.params)
        return merged

    @property
    def settings(self) -> _Params:
        """Проверенные параметры эксперимента (значения по умолчанию + params)"""
        return PARAMS_MODELS[self.experiment].model_validate(self.merged_params)
