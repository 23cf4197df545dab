import numpy as np
import pytest
from simplex_models.models import Dataset, ModelSpec
from weighting.models import WeightSpec
from sampling.exact import sample_dirichlet, sample_logistic_normal
from sampling.truth import banded_K


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def dirichlet_data():
    """n=30, m=4 strictly positive compositions."""
    return sample_dirichlet([2.0, 3.0, 1.5, 4.0], 30, seed=7)


@pytest.fixture
def banded_data():
    """Logistic-normal sample around a banded Laplacian truth, m=5, s=1."""
    truth = banded_K(5, 1)
    data = sample_logistic_normal(truth.K * 4, -np.ones(5), 120, seed=3)
    return data, truth


@pytest.fixture
def am1_spec():
    return ModelSpec(a=0.0, b=0.0, mode="am1")


def random_dataset(rng, n, m, zeros=False):
    samples = rng.dirichlet(np.full(m, 2.0), size=n)
    if zeros:
        samples[0, 0] = 0.0
        samples[0] /= samples[0].sum()
    return Dataset(samples=samples)


def power_weights(m, c=2.0, pi=1.0):
    return WeightSpec.power(c, m, pi=pi)
