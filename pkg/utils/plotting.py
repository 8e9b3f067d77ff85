"""
Детерминированные SVG-рисунки через matplotlib (бэкенд Agg).

Дата в метаданных отключена, а соль идентификаторов фиксирована,
поэтому одинаковые данные дают одинаковые SVG.
"""
import io
from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from config import FIGURE_SETTINGS  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = FIGURE_SETTINGS["svg_hashsalt"]
matplotlib.rcParams["svg.fonttype"] = "none"

# Серия: (x, y, подпись, стиль)
Series = Tuple[Sequence[float], Sequence[float], str, str]


def _to_svg(figure) -> bytes:
    buffer = io.BytesIO()
    figure.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(figure)
    return buffer.getvalue()


def panels_svg(
    panels: Sequence[Dict],
    log_y: bool = False,
    title: Optional[str] = None,
) -> bytes:
    """
    Ряд панелей с линиями/точками.

    Args:
        panels: Словари {"title", "xlabel", "ylabel", "series": [Series, ...]}
        log_y: Логарифмическая ось y
        title: Общий заголовок

    Returns:
        Содержимое SVG
    """
    figure, axes = plt.subplots(
        1, len(panels),
        figsize=(FIGURE_SETTINGS["panel_width"] * len(panels), FIGURE_SETTINGS["height"]),
        squeeze=False,
    )
    for axis, panel in zip(axes[0], panels):
        for x, y, label, style in panel["series"]:
            y = np.asarray(y, dtype=float)
            if log_y:
                y = np.where(y > 0, y, np.nan)
            axis.plot(x, y, style, label=label, markersize=3)
        if log_y:
            axis.set_yscale("log")
        axis.set_title(panel.get("title", ""))
        axis.set_xlabel(panel.get("xlabel", ""))
        axis.set_ylabel(panel.get("ylabel", ""))
        axis.grid(True, alpha=0.3)
        axis.legend(fontsize=8)
    if title:
        figure.suptitle(title)
    figure.tight_layout()
    return _to_svg(figure)


def errorbar_svg(panels: Sequence[Dict], title: Optional[str] = None) -> bytes:
    """Панели со средним и интервалом стандартной ошибки: series = [(x, mean, stderr, label)]"""
    figure, axes = plt.subplots(
        1, len(panels),
        figsize=(FIGURE_SETTINGS["panel_width"] * len(panels), FIGURE_SETTINGS["height"]),
        squeeze=False,
    )
    for axis, panel in zip(axes[0], panels):
        for x, mean, stderr, label in panel["series"]:
            mean, stderr = np.asarray(mean, dtype=float), np.asarray(stderr, dtype=float)
            axis.plot(x, mean, "o-", label=label, markersize=3)
            axis.fill_between(x, mean - stderr, mean + stderr, alpha=0.25)
        axis.set_title(panel.get("title", ""))
        axis.set_xlabel(panel.get("xlabel", ""))
        axis.set_ylabel(panel.get("ylabel", ""))
        axis.grid(True, alpha=0.3)
        axis.legend(fontsize=8)
    if title:
        figure.suptitle(title)
    figure.tight_layout()
    return _to_svg(figure)
