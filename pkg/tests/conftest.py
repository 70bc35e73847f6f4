"""
Shared fixtures: the repository root on sys.path and small synthetic datasets.
"""
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.dataset import TimeSeriesDataset
from utils.run_config import RunConfig
from utils.synthetic_data import make_sine_bursts, make_train_test


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def univariate_pair():
    """16 training and 20 test sine-burst series of length 48."""
    return make_train_test(n_train=8, n_test=10, length=48, seed=3)


@pytest.fixture
def multichannel_pair():
    """3-channel variant of the sine-burst problem."""
    return make_train_test(n_train=8, n_test=5, length=40, channels=3, seed=5,
                           name="SineBursts3D")


@pytest.fixture
def small_train():
    return make_sine_bursts(n_per_class=8, length=40, seed=11)


@pytest.fixture
def random_dataset(rng):
    """Random-walk dataset with three classes and 12 rows."""
    data = np.cumsum(rng.normal(size=(12, 1, 30)), axis=2)
    labels = np.arange(12) % 3
    return TimeSeriesDataset(data, labels, name="Walks", class_names=("x", "y", "z"))


def small_config(**overrides) -> RunConfig:
    """A fast configuration: few kernels, one thread unless overridden."""
    values = {"kernel_count": 8, "thread_count": 1, "seed": 7}
    values.update(overrides)
    return RunConfig(**values)


@pytest.fixture
def make_config():
    return small_config
