"""
Симуляция GP-UCB по временным ядрам разных классов с верхней и нижней границами.
"""
import logging
from typing import Dict, List, Tuple

import numpy as np

from models.data import BoundReport, RegretTrace, TVBOConfig
from models.experiment import ExperimentConfig, RegretParams
from services.bounds_service import bound_report
from services.tvbo_service import run_tvbo
from storage.csv_io import to_csv, trace_to_csv
from storage.writer import ArtifactWriter
from utils.plotting import errorbar_svg
from utils.pool import run_pool

logger = logging.getLogger(__name__)


def tvbo_config(settings: RegretParams, name: str, seed: int) -> TVBOConfig:
    return TVBOConfig(
        spatial=settings.spatial,
        temporal=settings.temporal[name],
        delta=settings.delta,
        horizon=settings.horizon,
        confidence=settings.confidence,
        lipschitz=settings.lipschitz,
        grid_resolution=settings.grid_resolution,
        noise=settings.noise,
        seed=seed,
    )


def _stderr(values: np.ndarray) -> float:
    return float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0


def run(config: ExperimentConfig, writer: ArtifactWriter) -> Dict:
    settings: RegretParams = config.settings
    seeds = [config.seed + r for r in range(settings.replications)]
    jobs = [(name, seed) for name in settings.temporal for seed in seeds]

    def replicate(job: Tuple[str, int]) -> Tuple[RegretTrace, BoundReport]:
        name, seed = job
        run_config = tvbo_config(settings, name, seed)
        trace = run_tvbo(run_config)
        return trace, bound_report(trace, run_config)

    results = run_pool(replicate, jobs, config.jobs)

    summary: List[tuple] = []
    plot_series = []
    for name in settings.temporal:
        runs = [result for (kernel, _), result in zip(jobs, results) if kernel == name]
        for trace, report in runs:
            writer.write_text(f"regret/{name}/trace_seed{trace.seed}.csv", trace_to_csv(trace))
            writer.write_json(f"regret/{name}/bounds_seed{trace.seed}.json", report.model_dump(mode="json"))

        cumulative = np.array([trace.cumulative for trace, _ in runs])
        upper = np.array([report.upper_curve for _, report in runs])
        lower = np.array([np.cumsum([step.term for step in report.lower_steps]) for _, report in runs])
        violation = float(np.mean([report.c1_violation_fraction for _, report in runs]))

        for n in settings.checkpoints:
            R = cumulative[:, n - 1]
            holds = np.all(cumulative[:, :n] <= upper[:, :n], axis=1)
            summary.append((
                name, n, float(R.mean()), _stderr(R), float(R.mean() / n),
                float(upper[:, n - 1].mean()), float(lower[:, n - 1].mean()),
                float(holds.mean()), bool(R.mean() >= lower[:, n - 1].mean() - 3 * _stderr(R)), violation,
            ))

        steps = np.arange(1, settings.horizon + 1)
        ratio = cumulative / steps
        plot_series.append((steps, ratio.mean(axis=0), ratio.std(axis=0, ddof=1) / np.sqrt(len(runs))
                            if len(runs) > 1 else np.zeros(settings.horizon), name))
        logger.info(f"regret: {name}: R_n/n = {ratio[:, -1].mean():.4f} при n = {settings.horizon}")

    writer.write_text("regret/summary.csv", to_csv(
        ("kernel", "n", "R_mean", "R_stderr", "R_over_n", "upper_mean", "lower_mean", "upper_hold_fraction",
         "lower_holds", "c1_violation_fraction"),
        summary,
    ))
    writer.write_bytes("regret/regret.svg", errorbar_svg([
        {"title": "R_n / n", "xlabel": "n", "ylabel": "R_n / n", "series": plot_series},
    ]))
    return {"runs": len(results)}
