import argparse
import logging
import sys
from typing import List, Optional

from config import LOG_LEVEL
from handlers import listing, run, validate
from handlers.router import Router
from middlewares.errors import EXIT_CONFIG_ERROR, ErrorMiddleware

# Настройка логирования
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

# Порядок подкоманд в справке
ROUTERS: List[Router] = [run.router, validate.router, listing.router]


def build_parser() -> argparse.ArgumentParser:
    """Собирает парсер из подкоманд всех зарегистрированных роутеров"""
    parser = argparse.ArgumentParser(
        prog="tvbo-spectra",
        description="Спектральный анализ ядер и симуляции TVBO: воспроизведение рисунков и таблицы",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for router in ROUTERS:
        for command in router.commands.values():
            sub = subparsers.add_parser(command.name, help=command.help)
            sub.add_argument("--config", help="Путь к файлу TOML или JSON")
            sub.add_argument("--seed", type=int, help="Зерно генератора")
            sub.add_argument("--out", help="Каталог для артефактов")
            sub.add_argument("--jobs", type=int, help="Число воркеров")
            for flags, options in command.arguments:
                sub.add_argument(*flags, **options)
            sub.set_defaults(handler=command.handler)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа CLI; возвращает код выхода"""

    # 1. Разбор аргументов
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse завершает работу с кодом 2 при ошибке аргументов
        return EXIT_CONFIG_ERROR if e.code else 0

    # 2. Запуск обработчика через middleware
    logger.debug(f"Подкоманда: {args.command}")
    return ErrorMiddleware()(args.handler, args)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Остановлено пользователем")
        sys.exit(130)
