import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_pool(func: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """
    Выполняет func для каждого элемента на ограниченном пуле потоков.

    Args:
        func: Функция одного повтора
        items: Входные элементы (например, зерна)
        jobs: Число воркеров

    Returns:
        Результаты в порядке входных элементов
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    workers = min(jobs, len(items))
    logger.info(f"Запуск {len(items)} задач на пуле из {workers} потоков")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        # map сохраняет порядок входа независимо от порядка завершения
        return list(executor.map(func, items))
