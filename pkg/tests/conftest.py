import numpy as np
import pytest
from scipy import stats


def normal_scores(n, loc=0.0, scale=1.0):
    """Deterministic pseudo-sample: standardized normal scores.

    Mean exactly ``loc`` and ML standard deviation exactly ``scale`` up to
    float rounding, so closed-form peaks land on known grid nodes.
    """
    i = np.arange(1, n + 1)
    z = stats.norm.ppf((i - 0.375) / (n + 0.25))
    z = z - z.mean()
    z = z / np.sqrt(np.mean(z ** 2))
    return loc + scale * z


@pytest.fixture
def y10():
    return normal_scores(10)


@pytest.fixture
def y12():
    return normal_scores(12)


@pytest.fixture
def y20():
    return normal_scores(20)
