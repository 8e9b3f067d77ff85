"""
Законы масштабирования: число собственных значений K^(n) в [a, b] и I/n при росте n.
"""
import logging
from typing import Dict, List

from models.data import ScalingRow
from models.experiment import ExperimentConfig, ScalingParams
from models.kernels import KernelClassTag
from models.spectrum import TimeGrid
from services.bounds_service import scaling_diagnostic
from services.kernel_service import classify
from services.spectral_service import build_temporal_matrix, count_positive, eig_sym
from storage.csv_io import scaling_to_csv, to_csv
from storage.writer import ArtifactWriter
from utils.plotting import errorbar_svg
from utils.pool import run_pool

logger = logging.getLogger(__name__)

# Ожидаемые законы по классам: (число в [a, b], I(f_n, y_n), гарантия на R_n)
CLASS_LAWS = {
    KernelClassTag.BROADBAND: ("O(n)", "Θ(n)", "линейное сожаление"),
    KernelClassTag.BAND_LIMITED: ("O(n)", "Θ(n)", "линейное сожаление"),
    KernelClassTag.ALMOST_PERIODIC: ("O(1)", "o(n)", "без сожаления"),
    KernelClassTag.LOW_RANK: ("O(1)", "o(n)", "без сожаления"),
}


def scaling_rows(config: ExperimentConfig) -> Dict[str, List[ScalingRow]]:
    """Таблицы масштабирования по всем временным ядрам, повторы по зернам seed, seed+1, ..."""
    settings: ScalingParams = config.settings
    seeds = [config.seed + r for r in range(settings.replications)]

    def diagnose(name: str) -> List[ScalingRow]:
        return scaling_diagnostic(
            settings.spatial,
            settings.temporal[name],
            settings.n_values,
            settings.interval,
            settings.delta,
            settings.noise,
            seeds,
            label=name,
        )

    names = list(settings.temporal)
    return dict(zip(names, run_pool(diagnose, names, config.jobs)))


def run_fig5(config: ExperimentConfig, writer: ArtifactWriter) -> Dict:
    settings: ScalingParams = config.settings
    tables = scaling_rows(config)
    rows = [row for name in tables for row in tables[name]]
    writer.write_text("fig5/scaling.csv", scaling_to_csv(rows))

    a, b = settings.interval
    svg = errorbar_svg([
        {"title": f"Число λ в [{a:g}, {b:g}]", "xlabel": "n", "ylabel": "число",
         "series": [([r.n for r in t], [r.count for r in t], [r.count_stderr for r in t], name)
                    for name, t in tables.items()]},
        {"title": "I / n", "xlabel": "n", "ylabel": "I / n",
         "series": [([r.n for r in t], [r.info_per_n for r in t], [r.info_per_n_stderr for r in t], name)
                    for name, t in tables.items()]},
    ])
    writer.write_bytes("fig5/scaling.svg", svg)
    return {"rows": len(rows)}


def run_table1(config: ExperimentConfig, writer: ArtifactWriter) -> Dict:
    settings: ScalingParams = config.settings
    tables = scaling_rows(config)
    n_first, n_last = settings.n_values[0], settings.n_values[-1]

    table = []
    for name, rows in tables.items():
        kernel = settings.temporal[name]
        kernel_class = classify(kernel)
        count_law, info_law, guarantee = CLASS_LAWS[kernel_class.tag]
        first, last = rows[0], rows[-1]
        growth = last.count / first.count if first.count > 0 else float("inf")
        positive = count_positive(eig_sym(build_temporal_matrix(kernel, TimeGrid(n_last, settings.delta)), want_vectors=False))
        table.append((
            name,
            kernel_class.tag.value,
            kernel_class.support_bounded,
            kernel_class.support_discrete,
            count_law,
            first.count,
            last.count,
            growth,
            info_law,
            first.info_per_n,
            last.info_per_n,
            positive,
            guarantee,
        ))
        logger.info(f"table1: {name} ({kernel_class.tag.value}): рост числа {growth:.2f}x от n={n_first} до n={n_last}")

    header = (
        "kernel", "class", "bounded_support", "discrete_support", "count_law",
        f"count_n{n_first}", f"count_n{n_last}", "count_growth", "info_law",
        f"I_over_n_n{n_first}", f"I_over_n_n{n_last}", f"positive_KT_n{n_last}", "guarantee",
    )
    writer.write_text("table1/table.csv", to_csv(header, table))
    return {"kernels": len(table)}
