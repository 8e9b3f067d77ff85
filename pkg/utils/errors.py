"""
Иерархия исключений библиотеки.

Все ошибки наследуются от TVBOError, поэтому обработчики CLI
могут перехватывать их одним блоком и сопоставлять с кодом выхода.
"""
from typing import Optional


class TVBOError(Exception):
    """Базовая ошибка библиотеки"""


class DomainError(TVBOError, ValueError):
    """Нарушено предусловие операции (n < 1, δ вне (0, 1) и т.п.)"""


class WrongClass(DomainError):
    """Операция не определена для данного класса временного ядра"""

    def __init__(self, operation: str, kernel_class: str):
        self.operation = operation
        self.kernel_class = kernel_class
        super().__init__(f"Операция {operation} не применима к ядру класса {kernel_class}")


class ToleranceUnreachable(TVBOError):
    """Полная реконструкция по DCT не достигает требуемой точности"""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(f"Невязка реконструкции {residual:.3e} превышает допуск {tolerance:.3e}")


class DimensionMismatch(DomainError):
    """Размерности входных данных не согласованы"""


class ConvergenceFailure(TVBOError):
    """Симметричный собственный решатель не сошелся"""


class SingularSystem(TVBOError):
    """Разложение Холецкого регуляризованной матрицы не удалось"""


class CapExceeded(TVBOError):
    """Размер сетки для выборки превышает настроенный предел"""

    def __init__(self, spatial_size: int, time_size: int, cap: int):
        self.spatial_size = spatial_size
        self.time_size = time_size
        self.cap = cap
        super().__init__(
            f"Сетка {spatial_size} x {time_size} = {spatial_size * time_size} "
            f"превышает предел {cap} ячеек"
        )


class MissingEigenvectors(TVBOError):
    """Спектр не содержит собственных векторов"""


class ScaleMismatch(DomainError):
    """Спектр задан не в том масштабе (Matrix/Operator)"""


class InsufficientData(TVBOError):
    """Недостаточно данных для вычисления"""


class InvalidConfig(TVBOError):
    """Конфигурация эксперимента некорректна"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ParseError(InvalidConfig):
    """Ошибка разбора файла конфигурации с указанием строки или поля"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.line = line
        location = f"строка {line}: " if line is not None else ""
        super().__init__(f"{location}{message}", field=field)


class IoFailure(TVBOError):
    """Ошибка записи артефактов"""
