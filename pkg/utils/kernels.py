"""
Random dilated convolutional kernels and the PPV/max pooling baseline.

Kernel parameterization follows ROCKET: length from {7, 9, 11}, standard
normal weights centered to mean zero, bias uniform on [-1, 1], dilation
2^x with x uniform on [0, log2((l - 1) / (length - 1))], and padding switched
on with probability one half. Out-of-range inputs count as zero.
"""
import math
import time
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from numba import njit, prange

from utils.dataset import MIN_SERIES_LENGTH, TimeSeries, TimeSeriesDataset
from utils.errors import ConfigError, EmptyActivation, InputTooShort, KernelTooWide
from utils.feature_matrix import ColumnDescriptor, FeatureMatrix
from utils.random_stream import RandomStream

CANDIDATE_LENGTHS = (7, 9, 11)
MAX_KERNEL_LENGTH = max(CANDIDATE_LENGTHS)


@dataclass(frozen=True, eq=False)
class Kernel:
    """One random convolutional kernel."""

    weights: np.ndarray
    bias: float
    dilation: int
    padding: int
    channel: int = 0

    @property
    def length(self) -> int:
        return int(self.weights.shape[0])

    @property
    def span(self) -> int:
        return (self.length - 1) * self.dilation

    def output_length(self, series_length: int) -> int:
        return series_length + 2 * self.padding - self.span


@dataclass(frozen=True, eq=False)
class KernelSet:
    """K kernels generated for one input length, with packed parameter arrays."""

    kernels: Tuple[Kernel, ...]
    input_length: int
    channel_count: int = 1

    def __len__(self) -> int:
        return len(self.kernels)

    def packed(self):
        """
        Pack kernel parameters into flat arrays for the compiled loops.

        Returns:
            Tuple of (weights (K, 11), lengths, biases, dilations, paddings, channels)
        """
        count = len(self.kernels)
        weights = np.zeros((count, MAX_KERNEL_LENGTH), dtype=np.float64)
        lengths = np.zeros(count, dtype=np.int64)
        biases = np.zeros(count, dtype=np.float64)
        dilations = np.zeros(count, dtype=np.int64)
        paddings = np.zeros(count, dtype=np.int64)
        channels = np.zeros(count, dtype=np.int64)
        for i, k in enumerate(self.kernels):
            weights[i, :k.length] = k.weights
            lengths[i] = k.length
            biases[i] = k.bias
            dilations[i] = k.dilation
            paddings[i] = k.padding
            channels[i] = k.channel
        return weights, lengths, biases, dilations, paddings, channels

    def output_lengths(self) -> np.ndarray:
        return np.array([k.output_length(self.input_length) for k in self.kernels], dtype=np.int64)

    @classmethod
    def from_packed(cls, weights, lengths, biases, dilations, paddings, channels,
                    input_length: int, channel_count: int) -> "KernelSet":
        kernels = []
        for i in range(len(lengths)):
            w = np.array(weights[i, :int(lengths[i])], dtype=np.float64)
            w.setflags(write=False)
            kernels.append(Kernel(w, float(biases[i]), int(dilations[i]),
                                  int(paddings[i]), int(channels[i])))
        return cls(tuple(kernels), int(input_length), int(channel_count))


def _draw_kernel(rng: np.random.Generator, input_length: int, channel_count: int) -> Kernel:
    length = int(rng.choice(CANDIDATE_LENGTHS))
    weights = rng.normal(0.0, 1.0, length)
    weights = weights - weights.mean()
    weights.setflags(write=False)
    bias = float(rng.uniform(-1.0, 1.0))

    upper = max(0.0, math.log2((input_length - 1) / (length - 1)))
    dilation = max(1, int(2 ** rng.uniform(0.0, upper)))

    padded = bool(rng.integers(2))
    # at the shortest inputs an 11-tap kernel only fits once padded
    if (length - 1) * dilation > input_length - 1:
        padded = True
    padding = ((length - 1) * dilation) // 2 if padded else 0

    channel = int(rng.integers(channel_count))
    return Kernel(weights, bias, dilation, padding, channel)


def generate_kernels(count: int, input_length: int, channel_count: int,
                     stream: RandomStream) -> KernelSet:
    """
    Generate random kernels; kernel i draws from stream.derive("kernel", i).

    Args:
        count: Number of kernels K
        input_length: Series length l the kernels will see
        channel_count: Number of channels m
        stream: Seeded random stream

    Returns:
        KernelSet with exactly K kernels
    """
    if input_length < MIN_SERIES_LENGTH:
        raise InputTooShort(f"input length must be at least {MIN_SERIES_LENGTH}",
                            input_length=input_length)
    if count < 1:
        raise ConfigError("kernel count must be positive", option="kernel_count", value=count)
    if channel_count < 1:
        raise ConfigError("channel count must be positive", option="channel_count",
                          value=channel_count)
    kernels = tuple(
        _draw_kernel(stream.derive("kernel", i).generator(), input_length, channel_count)
        for i in range(count)
    )
    return KernelSet(kernels, input_length, channel_count)


# -- compiled convolution ---------------------------------------------------------

@njit(cache=True)
def convolve(x, weights, length, bias, dilation, padding, out):
    """Write the activation of x into out; returns the output length."""
    n = x.shape[0]
    output_length = n + 2 * padding - (length - 1) * dilation
    for t in range(output_length):
        total = bias
        index = t - padding
        for j in range(length):
            if index >= 0 and index < n:
                total += weights[j] * x[index]
            index += dilation
        out[t] = total
    return output_length


@njit(parallel=True, cache=True)
def _rocket_features(X, weights, lengths, biases, dilations, paddings, channels):
    n = X.shape[0]
    l = X.shape[2]
    count = lengths.shape[0]
    features = np.zeros((n, 2 * count), dtype=np.float64)
    for i in prange(n):
        # padded output is never longer than the input
        buffer = np.empty(l)
        for k in range(count):
            size = convolve(X[i, channels[k]], weights[k], lengths[k], biases[k],
                            dilations[k], paddings[k], buffer)
            positive = 0
            best = -np.inf
            for t in range(size):
                value = buffer[t]
                if value > 0:
                    positive += 1
                if value > best:
                    best = value
            features[i, 2 * k] = positive / size
            features[i, 2 * k + 1] = best
    return features


def _series_array(x: Union[TimeSeries, np.ndarray]) -> np.ndarray:
    values = x.values if isinstance(x, TimeSeries) else np.asarray(x, dtype=np.float64)
    if values.ndim == 1:
        values = values[np.newaxis, :]
    return np.ascontiguousarray(values, dtype=np.float64)


def apply_kernel(kernel: Kernel, x: Union[TimeSeries, np.ndarray]) -> np.ndarray:
    """
    Convolve one series with one kernel on the kernel's channel.

    Args:
        kernel: Kernel to apply
        x: TimeSeries, or array of shape (channels, length) or (length,)

    Returns:
        Activation vector of length l + 2p - (l_k - 1)·d
    """
    values = _series_array(x)
    if kernel.channel >= values.shape[0]:
        raise KernelTooWide("kernel reads a channel the series does not have",
                            channel=kernel.channel, channels=values.shape[0])
    output_length = kernel.output_length(values.shape[1])
    if output_length < 1:
        raise KernelTooWide("kernel span exceeds the padded series length",
                            span=kernel.span, length=values.shape[1], padding=kernel.padding)
    out = np.empty(output_length, dtype=np.float64)
    weights = np.ascontiguousarray(kernel.weights, dtype=np.float64)
    convolve(values[kernel.channel], weights, kernel.length, kernel.bias,
             kernel.dilation, kernel.padding, out)
    return out


def pool_features(activation) -> Tuple[float, float]:
    """
    PPV and max pooling of one activation.

    Args:
        activation: Nonempty activation vector

    Returns:
        Tuple of (fraction of strictly positive entries, maximum entry)
    """
    activation = np.asarray(activation, dtype=np.float64).ravel()
    if activation.size == 0:
        raise EmptyActivation("cannot pool an empty activation")
    return float(np.count_nonzero(activation > 0) / activation.size), float(activation.max())


def check_kernel_fit(kernel_set: KernelSet, series_length: int) -> None:
    for index, kernel in enumerate(kernel_set.kernels):
        if kernel.output_length(series_length) < 1:
            raise KernelTooWide("kernel span exceeds the padded series length",
                                kernel=index, span=kernel.span, length=series_length)
        if kernel.channel >= kernel_set.channel_count:
            raise KernelTooWide("kernel reads a channel outside the kernel set",
                                kernel=index, channel=kernel.channel)


def rocket_transform(data: Union[TimeSeriesDataset, np.ndarray], kernel_set: KernelSet,
                     source: str = "rocket") -> FeatureMatrix:
    """
    ROCKET pooling features: (ppv, max) for every kernel, kernel-major.

    Args:
        data: Dataset or array of shape (n, channels, length)
        kernel_set: Kernels generated for this input length
        source: Source tag written into the column descriptors

    Returns:
        FeatureMatrix of shape (n, 2K)
    """
    X = data.data if isinstance(data, TimeSeriesDataset) else np.asarray(data, dtype=np.float64)
    if X.ndim == 2:
        X = X[:, np.newaxis, :]
    X = np.ascontiguousarray(X, dtype=np.float64)
    check_kernel_fit(kernel_set, X.shape[2])
    if X.shape[1] < kernel_set.channel_count:
        raise KernelTooWide("series have fewer channels than the kernel set expects",
                            channels=X.shape[1], expected=kernel_set.channel_count)

    started = time.perf_counter()
    values = _rocket_features(X, *kernel_set.packed())
    elapsed = time.perf_counter() - started

    columns: List[ColumnDescriptor] = []
    for k in range(len(kernel_set)):
        columns.append(ColumnDescriptor(source, k, "ppv"))
        columns.append(ColumnDescriptor(source, k, "max"))
    return FeatureMatrix(values, columns, timings={"convolution_s": elapsed})
