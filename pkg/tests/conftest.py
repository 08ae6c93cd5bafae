import math

import numpy as np
import pytest

from lm05sim import kernels


def three_sigma(p: float, n: int) -> float:
    return 3.0 * math.sqrt(p * (1.0 - p) / n)


@pytest.fixture
def rng():
    return np.random.default_rng(20061016)


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return request.param
