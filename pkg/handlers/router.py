from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

# Аргумент подкоманды: (флаги, параметры add_argument)
Argument = Tuple[Tuple[str, ...], Dict[str, Any]]


@dataclass
class Command:
    name: str
    help: str
    handler: Callable
    arguments: List[Argument] = field(default_factory=list)


class Router:
    """Набор подкоманд CLI одного модуля обработчиков"""

    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, help: str, arguments: List[Argument] = None):
        def decorator(handler: Callable) -> Callable:
            self.commands[name] = Command(name, help, handler, list(arguments or []))
            return handler
        return decorator
