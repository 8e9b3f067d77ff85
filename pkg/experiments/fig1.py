"""
Спектры K_S/n, K_T и K = K_S ∘ K_T и их приближение произведением.
"""
import logging
from typing import Dict

import numpy as np

from models.experiment import ExperimentConfig, Fig1Params
from models.kernels import SpatialKernel, TemporalKernel
from models.spectrum import Spectrum, TimeGrid
from services.kernel_service import eval_spatial
from services.spectral_service import (
    approx_product_spectrum,
    build_spatiotemporal_matrix,
    build_temporal_matrix,
    eig_sym,
    operator_spectrum,
)
from storage.csv_io import spectrum_to_csv, to_csv
from storage.writer import ArtifactWriter
from utils.plotting import panels_svg

logger = logging.getLogger(__name__)


def product_spectra(spatial: SpatialKernel, temporal: TemporalKernel, n: int, delta: float, seed: int) -> Dict[str, Spectrum]:
    """
    Точные спектры K_S, K_T, K и приближение произведением для равномерных точек.

    Returns:
        Словарь {"spatial", "temporal", "exact", "approx"}
    """
    X = np.random.default_rng(seed).random((n, spatial.dim))
    grid = TimeGrid(n, delta)
    spatial_spectrum = eig_sym(eval_spatial(spatial, X), want_vectors=False)
    temporal_spectrum = eig_sym(build_temporal_matrix(temporal, grid), want_vectors=False)
    exact = eig_sym(build_spatiotemporal_matrix(spatial, temporal, X, grid.times), want_vectors=False)
    return {
        "spatial": spatial_spectrum,
        "temporal": temporal_spectrum,
        "exact": exact,
        "approx": approx_product_spectrum(spatial_spectrum, temporal_spectrum, n),
    }


def top_relative_error(exact: Spectrum, approx: Spectrum, top: int) -> float:
    """Средняя относительная ошибка по top наибольшим собственным значениям"""
    top = min(top, exact.size, approx.size)
    reference = exact.eigenvalues[:top]
    return float(np.mean(np.abs(approx.eigenvalues[:top] - reference) / np.abs(reference)))


def run(config: ExperimentConfig, writer: ArtifactWriter) -> Dict:
    settings: Fig1Params = config.settings
    spectra = product_spectra(settings.spatial, settings.temporal, settings.n, settings.delta, config.seed)
    error = top_relative_error(spectra["exact"], spectra["approx"], settings.top)
    logger.info(f"fig1: средняя относительная ошибка top-{settings.top} = {error:.4f}")

    writer.write_text("fig1/spatial_operator.csv", spectrum_to_csv(operator_spectrum(spectra["spatial"])))
    writer.write_text("fig1/temporal.csv", spectrum_to_csv(spectra["temporal"]))
    writer.write_text("fig1/product_exact.csv", spectrum_to_csv(spectra["exact"]))
    writer.write_text("fig1/product_approx.csv", spectrum_to_csv(spectra["approx"]))
    writer.write_text("fig1/summary.csv", to_csv(("n", "delta", "top", "mean_rel_error"),
                                                [(settings.n, settings.delta, settings.top, error)]))

    index = np.arange(1, settings.n + 1)
    svg = panels_svg([
        {"title": "K_S / n", "xlabel": "i", "ylabel": "λ",
         "series": [(index, operator_spectrum(spectra["spatial"]).eigenvalues, "точный", "b-")]},
        {"title": "K_T", "xlabel": "i", "ylabel": "λ",
         "series": [(index, spectra["temporal"].eigenvalues, "точный", "b-")]},
        {"title": "K", "xlabel": "i", "ylabel": "λ",
         "series": [(index, spectra["exact"].eigenvalues, "точный", "b-"),
                    (index, spectra["approx"].eigenvalues, "произведение", "C1--")]},
    ], log_y=True)
    writer.write_bytes("fig1/spectra.svg", svg)
    return {"mean_rel_error": error}
