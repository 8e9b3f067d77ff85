import logging

import numpy as np
import pytest

from models.kernels import SpatialKernel, TemporalKernel

logging.getLogger("matplotlib").setLevel(logging.WARNING)

SHIPPED_TEMPORAL = [
    {"family": "rbf", "lengthscale": 0.7},
    {"family": "matern", "lengthscale": 0.7, "nu": 0.5},
    {"family": "matern", "lengthscale": 0.7, "nu": 1.5},
    {"family": "matern", "lengthscale": 0.7, "nu": 2.5},
    {"family": "rational_quadratic", "lengthscale": 0.7, "alpha": 1.5},
    {"family": "sinc", "bandlimit": 1.0},
    {"family": "sinc_squared", "bandlimit": 1.0},
    {"family": "periodic", "period": 1.0, "lengthscale": 0.8},
    {"family": "cosine_sum", "lines": [[0.0, 0.4], [0.7, 0.35], [1.9, 0.25]]},
]


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(params=SHIPPED_TEMPORAL, ids=lambda p: f"{p['family']}-{p.get('nu', '')}")
def temporal_kernel(request) -> TemporalKernel:
    return TemporalKernel.model_validate(request.param)


@pytest.fixture
def spatial_rbf() -> SpatialKernel:
    return SpatialKernel(family="rbf", lengthscales=(0.3,), dim=1)


def make_kernel(**fields) -> TemporalKernel:
    return TemporalKernel.model_validate(fields)
