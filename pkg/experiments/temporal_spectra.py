"""
Точный спектр K_T против выборки S_T / Δ (широкополосное и полосно-ограниченное ядра).
"""
import logging
from typing import Dict

import numpy as np

from models.experiment import ExperimentConfig, PanelParams
from models.spectrum import TimeGrid
from services.spectral_service import approx_temporal_spectrum, build_temporal_matrix, count_positive, eig_sym
from storage.csv_io import to_csv
from storage.writer import ArtifactWriter
from utils.plotting import panels_svg

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, writer: ArtifactWriter) -> Dict:
    name = config.experiment.value
    settings: PanelParams = config.settings
    summary, plot_panels = [], []

    for n, delta in settings.panels:
        grid = TimeGrid(n, delta)
        exact = eig_sym(build_temporal_matrix(settings.temporal, grid), want_vectors=False)
        sampled = approx_temporal_spectrum(settings.temporal, grid)
        approx = sampled.spectrum
        mae = float(np.mean(np.abs(exact.eigenvalues - approx.eigenvalues)))

        rows = zip(range(1, n + 1), exact.eigenvalues, approx.eigenvalues, sampled.frequencies, sampled.values)
        writer.write_text(
            f"{name}/panel_n{n}_delta{delta:g}.csv",
            to_csv(("index", "exact", "approx_sorted", "frequency", "approx_unsorted"), rows),
        )
        summary.append((n, delta, mae, count_positive(exact), count_positive(approx), sampled.frequency_span))
        logger.info(f"{name}: n = {n}, Δ = {delta}: MAE = {mae:.4e}")

        index = np.arange(1, n + 1)
        plot_panels.append({
            "title": f"n = {n}, Δ = {delta:g}",
            "xlabel": "i",
            "ylabel": "λ",
            "series": [
                (index, exact.eigenvalues, "точный", "b-"),
                (index, approx.eigenvalues, "S_T/Δ, по убыванию", "g--"),
                (index, sampled.values, "S_T/Δ", "C1-"),
            ],
        })

    writer.write_text(
        f"{name}/summary.csv",
        to_csv(("n", "delta", "mae", "positive_exact", "positive_approx", "frequency_span"), summary),
    )
    writer.write_bytes(f"{name}/spectra.svg", panels_svg(plot_panels))
    return {"panels": len(summary)}
