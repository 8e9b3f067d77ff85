import os
from dotenv import load_dotenv

# Загрузка переменных окружения из .env файла
load_dotenv()

# Каталог для артефактов экспериментов
OUT_DIR = os.getenv("TVBO_OUT_DIR", "results")

# Размер пула воркеров для повторов экспериментов
JOBS = int(os.getenv("TVBO_JOBS", 1))
if JOBS < 1:
    raise ValueError("❌ TVBO_JOBS должен быть положительным числом")

# Уровень логирования
LOG_LEVEL = os.getenv("TVBO_LOG_LEVEL", "INFO").upper()

# Максимальное число ячеек сетки (пространство x время) для выборки из априорного GP
SAMPLE_CAP = int(os.getenv("TVBO_SAMPLE_CAP", 200_000))

# Бюджет времени для одного эксперимента "на рабочем столе", секунды
DESK_BUDGET_SECONDS = float(os.getenv("TVBO_DESK_BUDGET_SECONDS", 600))

# Пути к ресурсам
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
DOCS_DIR = os.path.join(BASE_DIR, "docs")

# Численные пороги
POSITIVE_REL_THRESHOLD = 1e-8  # Собственное значение "положительно", если > порога * λ_max
NEGATIVE_CLIP_WARNING = 1e-6  # Предупреждение при отрицательных значениях ниже -порога * λ_max
NOISELESS_JITTER = 1e-8  # Минимальный шум при обусловливании GP
LOWRANK_SUM_TOLERANCE = 1e-9  # Допуск на сумму весов низкорангового ядра
SPECTRAL_LINE_CUTOFF = 1e-17  # Спектральные линии легче этого веса отбрасываются
SYMMETRY_TOLERANCE = 1e-12  # Относительный допуск симметрии матриц

# Модель стоимости плотного собственного разложения: секунды ≈ константа * n^3
EIGH_SECONDS_PER_N3 = 3e-9

# Классы ожидаемого времени работы (верхняя граница в секундах)
RUNTIME_CLASSES = {
    "small": 10,
    "medium": 120,
    "large": DESK_BUDGET_SECONDS,
}

# Ядра по умолчанию
DEFAULT_SPATIAL_KERNEL = {"family": "rbf", "lengthscales": [0.2], "dim": 1}

DEFAULT_TEMPORAL_KERNELS = {
    "rbf": {"family": "rbf", "lengthscale": 0.25},
    "sinc_squared": {"family": "sinc_squared", "bandlimit": 2.0},
    "periodic": {"family": "periodic", "period": 0.3, "lengthscale": 1.0},
    "cosine_sum": {"family": "cosine_sum", "lines": [[0.0, 0.5], [1.0, 0.5]]},
}

# Параметры экспериментов по умолчанию
EXPERIMENT_DEFAULTS = {
    "fig1": {
        "n": 100,
        "delta": 0.1,
        "top": 20,
        "spatial": {"family": "rbf", "lengthscales": [1.0], "dim": 1},
        "temporal": {"family": "rbf", "lengthscale": 0.1},
    },
    "fig2": {
        "temporal": {"family": "rbf", "lengthscale": 0.25},
        "panels": [[100, 0.1], [100, 0.05], [200, 0.1]],
    },
    "fig3": {
        "temporal": {"family": "sinc_squared", "bandlimit": 1.0},
        "panels": [[100, 0.5], [100, 0.25], [200, 0.25]],
    },
    "fig4": {
        "temporal": {"family": "periodic", "period": 1.0, "lengthscale": 1.0},
        "divisors": [3, 6],
        "n_values": [60, 120],
        "tolerance": 1e-8,
    },
    "fig5": {
        "spatial": DEFAULT_SPATIAL_KERNEL,
        "temporal": DEFAULT_TEMPORAL_KERNELS,
        "n_values": [50, 100, 150, 200],
        "delta": 0.1,
        "interval": [1.0, 2.0],
        "noise": 0.01,
        "replications": 10,
    },
    "table1": {
        "spatial": DEFAULT_SPATIAL_KERNEL,
        "temporal": DEFAULT_TEMPORAL_KERNELS,
        "n_values": [100, 200],
        "delta": 0.1,
        "interval": [1.0, 2.0],
        "noise": 0.01,
        "replications": 3,
    },
    "regret": {
        "spatial": DEFAULT_SPATIAL_KERNEL,
        "temporal": {
            "rbf": {"family": "rbf", "lengthscale": 0.3},
            "sinc_squared": {"family": "sinc_squared", "bandlimit": 2.0},
            "periodic": {"family": "periodic", "period": 1.0, "lengthscale": 1.0},
            "cosine_sum": {"family": "cosine_sum", "lines": [[0.0, 0.5], [1.0, 0.5]]},
        },
        "delta": 0.1,
        "horizon": 200,
        "grid_resolution": 25,
        "noise": 0.01,
        "confidence": 0.1,
        "lipschitz": 10.0,
        "replications": 10,
        "checkpoints": [50, 100, 200],
    },
}

# Описания экспериментов для команды list
EXPERIMENT_DESCRIPTIONS = {
    "fig1": "Спектры K_S/n, K_T и K и их произведение-приближение",
    "fig2": "Широкополосное ядро: точный спектр K_T против выборки плотности",
    "fig3": "Ядро с ограниченной полосой: нули спектра выше частоты Найквиста",
    "fig4": "Периодическое ядро: ранг при соизмеримом шаге и DCT-приближение",
    "fig5": "Число собственных значений в [a, b] и I/n при росте n",
    "table1": "Сводная таблица классов временных ядер и законов масштабирования",
    "regret": "Симуляция GP-UCB, кумулятивное сожаление и границы",
}

# Настройки рисунков
FIGURE_SETTINGS = {
    "width": 6.4,
    "height": 4.0,
    "panel_width": 4.0,
    "svg_hashsalt": "tvbo-spectra",
    "dpi": 100,
}
