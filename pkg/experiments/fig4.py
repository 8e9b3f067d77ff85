"""
Периодическое ядро при соизмеримом шаге Δ = r/k: ровно k положительных собственных значений.
"""
import logging
import math
from typing import Dict

import numpy as np

from models.experiment import ExperimentConfig, Fig4Params
from models.spectrum import TimeGrid
from services.kernel_service import low_rank_approx
from services.spectral_service import approx_lowrank_spectrum, build_temporal_matrix, count_positive, eig_sym
from storage.csv_io import to_csv
from storage.writer import ArtifactWriter
from utils.plotting import panels_svg

logger = logging.getLogger(__name__)


def dct_sample_count(n: int, divisor: int) -> int:
    """Наименьшее N >= n с (N - 1) кратным k: тогда DCT-I не имеет утечки"""
    return divisor * math.ceil((n - 1) / divisor) + 1


def run(config: ExperimentConfig, writer: ArtifactWriter) -> Dict:
    settings: Fig4Params = config.settings
    kernel = settings.temporal
    counts, plot_panels = [], []

    for divisor in settings.divisors:
        delta = kernel.period / divisor
        for n in settings.n_values:
            exact = eig_sym(build_temporal_matrix(kernel, TimeGrid(n, delta)), want_vectors=False)
            lowrank = low_rank_approx(kernel, delta, dct_sample_count(n, divisor), settings.tolerance)
            approx = approx_lowrank_spectrum(lowrank, n)
            positive = count_positive(exact)

            writer.write_text(
                f"fig4/k{divisor}_n{n}.csv",
                to_csv(("index", "exact", "lowrank"), zip(range(1, n + 1), exact.eigenvalues, approx.eigenvalues)),
            )
            counts.append((divisor, n, delta, positive, lowrank.rank, lowrank.c0, count_positive(approx)))
            logger.info(f"fig4: Δ = r/{divisor}, n = {n}: положительных собственных значений {positive}")

            top = min(n, 3 * divisor)
            index = np.arange(1, top + 1)
            plot_panels.append({
                "title": f"Δ = r/{divisor}, n = {n}",
                "xlabel": "i",
                "ylabel": "λ",
                "series": [
                    (index, exact.eigenvalues[:top], "точный", "bo-"),
                    (index, approx.eigenvalues[:top], "DCT", "C1x--"),
                ],
            })

    writer.write_text(
        "fig4/counts.csv",
        to_csv(("divisor", "n", "delta", "positive_count", "cosines", "c0", "lowrank_nonzero"), counts),
    )
    writer.write_bytes("fig4/spectra.svg", panels_svg(plot_panels, log_y=True))
    return {"counts": {f"k{row[0]}_n{row[1]}": row[3] for row in counts}}
