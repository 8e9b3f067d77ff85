import logging
import time
from typing import Any, Dict, List

from experiments import EXPERIMENTS
from models.experiment import ExperimentConfig
from storage.writer import ArtifactWriter

logger = logging.getLogger(__name__)


def run_experiment(config: ExperimentConfig) -> List[Dict[str, Any]]:
    """
    Запускает эксперимент и записывает его артефакты.

    Args:
        config: Проверенная конфигурация эксперимента

    Returns:
        Манифест: список файлов с размерами и контрольными суммами
    """
    runner = EXPERIMENTS[config.experiment]
    started = time.perf_counter()
    logger.info(f"Запуск эксперимента {config.experiment.value} (seed={config.seed}, jobs={config.jobs})")

    with ArtifactWriter(config.out_dir) as writer:
        summary = runner(config, writer)

    elapsed = time.perf_counter() - started
    logger.info(f"Эксперимент {config.experiment.value} завершен за {elapsed:.1f} с: {summary}")
    return writer.manifest
