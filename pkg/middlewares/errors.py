import logging
import time
from typing import Callable

from utils.errors import InvalidConfig, TVBOError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


class ErrorMiddleware:
    """
    Обертка над обработчиками подкоманд.
    Сопоставляет исключения с кодами выхода и логирует время работы.
    """

    def __call__(self, handler: Callable, args) -> int:
        started = time.perf_counter()
        try:
            handler(args)
        except InvalidConfig as e:
            logger.error(f"Ошибка конфигурации: {e}")
            return EXIT_CONFIG_ERROR
        except (TVBOError, OSError) as e:
            logger.error(f"Ошибка выполнения ({type(e).__name__}): {e}")
            return EXIT_RUNTIME_ERROR
        except Exception as e:
            logger.exception(f"Непредвиденная ошибка ({type(e).__name__}): {e}")
            return EXIT_RUNTIME_ERROR
        logger.info(f"Команда {args.command} выполнена за {time.perf_counter() - started:.2f} с")
        return EXIT_OK
