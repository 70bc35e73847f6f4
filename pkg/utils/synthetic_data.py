"""
Synthetic two-class sine-burst problem for demos and end-to-end checks.

Class A holds a smooth three-cycle sine burst near a fixed position. Class B
holds the same burst, time-shifted later by a random offset
and warped by a random power-law time map, with the same noise. Extra
channels repeat the burst with a phase offset.
"""
from typing import Tuple

import numpy as np

from utils.dataset import TimeSeriesDataset
from utils.random_stream import RandomStream

CLASS_NAMES = ("A", "B")

BASE_CENTER = 0.4
# class B burst moves right by an offset in this range
SHIFT_RANGE = (0.2, 0.3)
# exponent of the monotone time map t -> t**gamma
WARP_RANGE = (0.8, 1.25)


def _burst(t: np.ndarray, center: float, width: float, cycles: float, phase: float) -> np.ndarray:
    envelope = np.exp(-0.5 * ((t - center) / width) ** 2)
    return envelope * np.sin(2 * np.pi * cycles * (t - center) / (4 * width) + phase)


def _series(rng: np.random.Generator, label: int, length: int, channels: int,
            noise: float) -> np.ndarray:
    t = np.linspace(0.0, 1.0, length)
    values = np.empty((channels, length))
    if label == 0:
        center = BASE_CENTER + rng.normal(0.0, 0.02)
        warped = t
    else:
        offset = rng.uniform(*SHIFT_RANGE)
        center = BASE_CENTER + offset
        warped = t ** rng.uniform(*WARP_RANGE)
    for c in range(channels):
        values[c] = _burst(warped, center, 0.08, 3.0, 0.5 * c)
        values[c] += rng.normal(0.0, noise, length)
    return values


def make_sine_bursts(n_per_class: int = 20, length: int = 128, channels: int = 1,
                     noise: float = 0.05, seed: int = 0,
                     name: str = "SineBursts") -> TimeSeriesDataset:
    """
    Generate a balanced sine-burst dataset.

    Args:
        n_per_class: Series per class
        length: Series length (at least 9)
        channels: Channel count
        noise: Gaussian noise standard deviation
        seed: Master seed
        name: Dataset name

    Returns:
        TimeSeriesDataset with classes "A" and "B"
    """
    rng = RandomStream(seed).derive("synthetic", 0).generator()
    labels = np.repeat(np.arange(2), n_per_class)
    data = np.stack([_series(rng, int(label), length, channels, noise) for label in labels])
    order = rng.permutation(labels.size)
    return TimeSeriesDataset(data[order], labels[order], name=name, class_names=CLASS_NAMES)


def make_train_test(n_train: int = 20, n_test: int = 50, length: int = 128,
                    channels: int = 1, noise: float = 0.05, seed: int = 0,
                    name: str = "SineBursts") -> Tuple[TimeSeriesDataset, TimeSeriesDataset]:
    """Train/test split drawn from independent seeds; sizes are per class."""
    train = make_sine_bursts(n_train, length, channels, noise, seed, name)
    test = make_sine_bursts(n_test, length, channels, noise, seed + 1, name)
    return train, test
