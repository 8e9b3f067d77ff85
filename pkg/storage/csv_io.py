"""
CSV-кодеки для спектров, наборов данных, траекторий и таблиц масштабирования.

Числа форматируются через repr(float), поэтому одинаковые входы дают
побайтно одинаковые файлы.
"""
import csv
import io
from typing import Iterable, List, Sequence

import numpy as np

from models.data import Dataset, RegretTrace, ScalingRow
from models.spectrum import Spectrum
from utils.errors import ParseError


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(value) for value in row])
    return buffer.getvalue()


def spectrum_to_csv(spectrum: Spectrum) -> str:
    """Колонки: index, eigenvalue, provenance_i, provenance_j"""
    rows = []
    for index, value in enumerate(spectrum.eigenvalues, start=1):
        if spectrum.provenance is not None:
            i, j = spectrum.provenance[index - 1]
            rows.append((index, value, int(i), int(j)))
        else:
            rows.append((index, value, "", ""))
    return to_csv(("index", "eigenvalue", "provenance_i", "provenance_j"), rows)


def dataset_to_csv(data: Dataset) -> str:
    """Колонки: x_1..x_d, t, y"""
    header = [f"x_{k}" for k in range(1, data.dim + 1)] + ["t", "y"]
    rows = (list(x) + [t, y] for x, t, y in zip(data.X, data.t, data.y))
    return to_csv(header, rows)


def dataset_from_csv(text: str, noise: float = 0.0) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("Пустой CSV-файл набора данных", line=1)
    dim = len(header) - 2
    if dim < 1 or header[-2:] != ["t", "y"] or header[:dim] != [f"x_{k}" for k in range(1, dim + 1)]:
        raise ParseError(f"Ожидался заголовок x_1..x_d,t,y, получено {header}", line=1)

    values: List[List[float]] = []
    for line_number, row in enumerate(reader, start=2):
        try:
            values.append([float(cell) for cell in row])
        except ValueError:
            raise ParseError(f"Нечисловое значение в строке {row}", line=line_number)
        if len(row) != dim + 2:
            raise ParseError(f"Ожидалось {dim + 2} значений, получено {len(row)}", line=line_number)

    array = np.asarray(values, dtype=float).reshape(-1, dim + 2)
    return Dataset(array[:, :dim], array[:, dim], array[:, dim + 1], noise)


def path_to_csv(values: np.ndarray, grid_points: np.ndarray, times: np.ndarray) -> str:
    """Матрица f̄ (пространство x время): строка на точку сетки, столбец на момент времени"""
    dim = grid_points.shape[1]
    header = [f"x_{k}" for k in range(1, dim + 1)] + [f"t={_format(t)}" for t in times]
    rows = (list(x) + list(row) for x, row in zip(grid_points, values))
    return to_csv(header, rows)


def trace_to_csv(trace: RegretTrace) -> str:
    """Колонки: iteration, t, x_chosen, x_star, r, R_cumulative"""
    rows = []
    cumulative = trace.cumulative
    for i in range(trace.n):
        rows.append((
            i + 1,
            trace.times[i],
            " ".join(_format(v) for v in trace.chosen[i]),
            " ".join(_format(v) for v in trace.optimal[i]),
            trace.regrets[i],
            cumulative[i],
        ))
    return to_csv(("iteration", "t", "x_chosen", "x_star", "r", "R_cumulative"), rows)


def scaling_to_csv(rows: Sequence[ScalingRow]) -> str:
    """Колонки: kernel, n, count, count_stderr, I_over_n, stderr, n0"""
    return to_csv(
        ("kernel", "n", "count", "count_stderr", "I_over_n", "stderr", "n0"),
        ((r.kernel, r.n, r.count, r.count_stderr, r.info_per_n, r.info_per_n_stderr, r.n0) for r in rows),
    )
