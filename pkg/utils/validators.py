import json
import logging
import os
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Dict, List, Optional, Tuple

from fuzzywuzzy import process
from pydantic import ValidationError

from config import DESK_BUDGET_SECONDS, EIGH_SECONDS_PER_N3, RUNTIME_CLASSES
from models.experiment import ExperimentConfig, ExperimentId, Fig1Params, Fig4Params, PanelParams, RegretParams, ScalingParams
from models.kernels import TemporalFamily
from utils.errors import InvalidConfig, ParseError

logger = logging.getLogger(__name__)

# Минимальная похожесть для подсказки "возможно, вы имели в виду"
SUGGESTION_CUTOFF = 60

TOML_LINE = re.compile(r"line (\d+)")


def suggest(value: str, choices: List[str]) -> Optional[str]:
    """Ближайший по написанию вариант или None"""
    match = process.extractOne(value, choices, score_cutoff=SUGGESTION_CUTOFF)
    return match[0] if match else None


def validate_choice(value: str, choices: List[str], field: str) -> Tuple[bool, Optional[str], Optional[str]]:
    """
    Валидация значения из фиксированного списка.

    Args:
        value: Введенное значение
        choices: Допустимые значения
        field: Имя поля для сообщения

    Returns:
        Tuple с результатом валидации:
        - Первый элемент: успешность валидации (True/False)
        - Второй элемент: нормализованное значение, если валидация успешна, иначе None
        - Третий элемент: сообщение об ошибке, если валидация не удалась, иначе None
    """
    normalized = str(value).strip().lower()
    if normalized in choices:
        return True, normalized, None

    hint = suggest(normalized, choices)
    message = f"Неизвестное значение {field}: '{value}'."
    if hint:
        message += f" Возможно, имелось в виду '{hint}'?"
    else:
        message += f" Допустимые значения: {', '.join(choices)}"
    return False, None, message


def validate_experiment_id(value: str) -> Tuple[bool, Optional[ExperimentId], Optional[str]]:
    ok, normalized, error = validate_choice(value, [e.value for e in ExperimentId], "experiment")
    return ok, ExperimentId(normalized) if ok else None, error


def validate_kernel_family(value: str) -> Tuple[bool, Optional[TemporalFamily], Optional[str]]:
    ok, normalized, error = validate_choice(value, [f.value for f in TemporalFamily], "family")
    return ok, TemporalFamily(normalized) if ok else None, error


def validate_output_dir(path: str) -> Tuple[bool, Optional[str], Optional[str]]:
    """Каталог результатов пуст и доступен на запись, либо может быть создан"""
    target = os.path.abspath(path)
    existing = target
    while not os.path.exists(existing):
        parent = os.path.dirname(existing)
        if parent == existing:
            break
        existing = parent
    if not os.path.isdir(existing):
        return False, None, f"Путь {existing} существует и не является каталогом"
    if existing == target and os.listdir(target):
        return False, None, f"Каталог {target} не пуст: укажите новый каталог результатов"
    if not os.access(existing, os.W_OK):
        return False, None, f"Каталог {existing} недоступен для записи"
    return True, target, None


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Читает TOML (или JSON по расширению .json).

    Args:
        path: Путь к файлу конфигурации

    Returns:
        Словарь с сырыми значениями
    """
    if not os.path.isfile(path):
        raise ParseError(f"Файл конфигурации не найден: {path}")
    with open(path, "rb") as handle:
        payload = handle.read()

    if path.lower().endswith(".json"):
        try:
            raw = json.loads(payload.decode("utf-8"))
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno) from e
    else:
        try:
            raw = tomllib.loads(payload.decode("utf-8"))
        except tomllib.TOMLDecodeError as e:
            match = TOML_LINE.search(str(e))
            raise ParseError(str(e), line=int(match.group(1)) if match else None) from e

    if not isinstance(raw, dict):
        raise ParseError("Корень конфигурации должен быть объектом")
    return raw


def _field_path(location) -> str:
    return ".".join(str(part) for part in location)


def _raise_validation(error: ValidationError, prefix: str = ""):
    first = error.errors()[0]
    field = _field_path(((prefix,) if prefix else ()) + tuple(first["loc"]))
    if first["type"] == "missing":
        raise ParseError("обязательное поле отсутствует", field=field) from error
    raise ParseError(first["msg"], field=field) from error


def build_config(raw: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Собирает ExperimentConfig и проверяет параметры эксперимента.

    Args:
        raw: Значения из файла
        overrides: Значения флагов CLI (seed, out_dir, jobs), None пропускаются

    Returns:
        Проверенная конфигурация
    """
    raw = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    if "experiment" in raw:
        ok, experiment, error = validate_experiment_id(raw["experiment"])
        if not ok:
            raise ParseError(error, field="experiment")
        raw["experiment"] = experiment

    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        _raise_validation(e)

    temporal = config.merged_params.get("temporal")
    kernels = temporal.values() if isinstance(temporal, dict) and "family" not in temporal else [temporal]
    for kernel in kernels:
        if isinstance(kernel, dict) and "family" in kernel:
            ok, _, error = validate_kernel_family(kernel["family"])
            if not ok:
                raise ParseError(error, field="params.temporal.family")

    try:
        config.settings
    except ValidationError as e:
        _raise_validation(e, prefix="params")

    ok, _, error = validate_output_dir(config.out_dir)
    if not ok:
        raise InvalidConfig(error, field="out_dir")
    return config


def estimate_feasibility(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Оценка размеров матриц и времени работы по модели n^3.

    Returns:
        Словарь с наибольшим размером матрицы, числом разложений,
        оценкой секунд, классом времени и предупреждениями
    """
    settings = config.settings
    if isinstance(settings, Fig1Params):
        n_max, decompositions = settings.n, 3
    elif isinstance(settings, PanelParams):
        n_max, decompositions = max(n for n, _ in settings.panels), len(settings.panels)
    elif isinstance(settings, Fig4Params):
        n_max, decompositions = max(settings.n_values), len(settings.n_values) * len(settings.divisors)
    elif isinstance(settings, ScalingParams):
        n_max = settings.n_max
        decompositions = len(settings.temporal) * len(settings.n_values) * settings.replications * 3
    else:
        assert isinstance(settings, RegretParams)
        n_max = settings.horizon
        # Спектры всех ведущих подматриц: Σ k^3 ≈ n^4 / 4
        decompositions = len(settings.temporal) * settings.replications * max(settings.horizon // 4, 1)

    seconds = EIGH_SECONDS_PER_N3 * n_max ** 3 * decompositions
    runtime_class = next((name for name, limit in RUNTIME_CLASSES.items() if seconds <= limit), "over_budget")
    warnings = []
    if seconds > DESK_BUDGET_SECONDS:
        warnings.append(
            f"Оценка стоимости плотных разложений {seconds:.0f} с превышает бюджет {DESK_BUDGET_SECONDS:.0f} с"
        )
    return {
        "experiment": config.experiment.value,
        "max_matrix_order": n_max,
        "decompositions": decompositions,
        "estimated_seconds": seconds,
        "runtime_class": runtime_class,
        "warnings": warnings,
    }


def validate_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Проверка файла конфигурации без побочных эффектов"""
    config = build_config(load_config_file(path), overrides)
    report = estimate_feasibility(config)
    for warning in report["warnings"]:
        logger.warning(warning)
    return report
