"""
The SPROCKET transform: prototype distances in random-convolution space.

Every kernel convolves all training series, keeps M of the resulting
activations as prototypes, and describes any series by its distance to each
prototype under the kernel's measure. Kernels are processed in chunks so the
activation block stays under a fixed memory cap; within a chunk the
convolution and distance loops run in parallel over (kernel, instance)
tasks, each writing its own output cells, so results do not depend on the
thread count.
"""
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numba
import numpy as np
from numba import njit, prange

from utils.dataset import TimeSeries, TimeSeriesDataset
from utils.distances import DistanceMeasure, distance_kernel
from utils.errors import ModelFormatError, ShapeMismatch, TooFewInstances
from utils.feature_matrix import ColumnDescriptor, FeatureMatrix, concat_features
from utils.kernels import KernelSet, check_kernel_fit, convolve, generate_kernels
from utils.prototypes import (PrototypeSet, SelectionStrategy, prototype_count,
                              select_kmeanspp_init, select_indices)
from utils.random_stream import RandomStream
from utils.run_config import RunConfig, window_for

logger = logging.getLogger(__name__)

MODEL_FORMAT = "sprocket-model"
MODEL_VERSION = 1

# activation block size cap per chunk of kernels
CHUNK_BYTES = 256 * 1024 * 1024

__all__ = [
    "DistanceCallCounter",
    "PrototypeModel",
    "apply_sprocket",
    "concat_features",
    "configure_threads",
    "fit_sprocket",
    "window_for",
]


class DistanceCallCounter:
    """Thread-safe tally of distance evaluations, split by phase."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counts: Dict[str, int] = {}

    def add(self, count: int, phase: str = "transform") -> None:
        if count < 0:
            raise ValueError("distance call count cannot decrease")
        with self._lock:
            self._counts[phase] = self._counts.get(phase, 0) + int(count)

    @property
    def total(self) -> int:
        with self._lock:
            return sum(self._counts.values())

    def by_phase(self) -> Dict[str, int]:
        with self._lock:
            return dict(self._counts)

    def reset(self) -> None:
        with self._lock:
            self._counts.clear()


def configure_threads(thread_count: int) -> int:
    """
    Cap numba's worker count for the compiled loops.

    Args:
        thread_count: Requested number of threads

    Returns:
        Thread count actually in effect
    """
    threads = max(1, min(int(thread_count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    return threads


# -- compiled passes --------------------------------------------------------------

@njit(parallel=True, cache=True)
def _activation_block(X, weights, lengths, biases, dilations, paddings, channel_index, out):
    chunk = lengths.shape[0]
    n = X.shape[0]
    width = channel_index.shape[1]
    for task in prange(chunk * n):
        k = task // n
        i = task % n
        for c in range(width):
            convolve(X[i, channel_index[k, c]], weights[k], lengths[k], biases[k],
                     dilations[k], paddings[k], out[k, i, c])


@njit(parallel=True, cache=True)
def _distance_block(activations, output_lengths, prototypes, codes, params, windows, out):
    chunk = activations.shape[0]
    n = activations.shape[1]
    width = activations.shape[2]
    count = prototypes.shape[1]
    calls = np.zeros(chunk * n, dtype=np.int64)
    for task in prange(chunk * n):
        k = task // n
        i = task % n
        size = output_lengths[k]
        for j in range(count):
            total = 0.0
            for c in range(width):
                total += distance_kernel(codes[k], activations[k, i, c, :size],
                                         prototypes[k, j, c, :size], params[k], windows[k])
            out[i, k * count + j] = total
        calls[task] = count * width
    return calls


# -- helpers ------------------------------------------------------------------------

def _znormalize(values: np.ndarray) -> np.ndarray:
    mean = values.mean(axis=-1, keepdims=True)
    std = values.std(axis=-1, keepdims=True)
    std[std == 0] = 1.0
    return (values - mean) / std


def _as_array(data: Union[TimeSeriesDataset, TimeSeries, np.ndarray]) -> np.ndarray:
    if isinstance(data, TimeSeriesDataset):
        X = data.data
    elif isinstance(data, TimeSeries):
        X = data.values[np.newaxis]
    else:
        X = np.asarray(data, dtype=np.float64)
        if X.ndim == 2:
            X = X[:, np.newaxis, :]
    if X.ndim != 3:
        raise ShapeMismatch("series must have shape (n, channels, length)", shape=list(X.shape))
    return np.ascontiguousarray(X, dtype=np.float64)


def _channel_index(kernel_set: KernelSet, channel_mode: str) -> np.ndarray:
    if channel_mode == "single":
        return np.array([[k.channel] for k in kernel_set.kernels], dtype=np.int64)
    channels = np.arange(kernel_set.channel_count, dtype=np.int64)
    return np.tile(channels, (len(kernel_set), 1))


def _chunk_size(n: int, width: int, length: int, kernels: int) -> int:
    per_kernel = max(1, n * width * length * 8)
    return int(max(1, min(kernels, CHUNK_BYTES // per_kernel)))


def _activations(X, packed, channel_index, start, stop, output_lengths, normalize):
    weights, lengths, biases, dilations, paddings, _ = packed
    block = np.zeros((stop - start, X.shape[0], channel_index.shape[1], X.shape[2]))
    _activation_block(X, weights[start:stop], lengths[start:stop], biases[start:stop],
                      dilations[start:stop], paddings[start:stop],
                      channel_index[start:stop], block)
    if normalize:
        for k in range(stop - start):
            size = output_lengths[start + k]
            block[k, :, :, :size] = _znormalize(block[k, :, :, :size])
    return block


# -- model ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PrototypeModel:
    """
    A fitted SPROCKET transform.

    Prototype activations are stored stacked as (K, M, channels, l) with each
    kernel's activations occupying the first l_out entries of the last axis.
    """

    kernel_set: KernelSet
    measures: Tuple[DistanceMeasure, ...]
    prototype_activations: np.ndarray
    source_indices: np.ndarray
    config: RunConfig
    input_length: int
    channel_count: int

    @property
    def kernel_count(self) -> int:
        return len(self.kernel_set)

    @property
    def prototypes_per_kernel(self) -> int:
        return int(self.source_indices.shape[1])

    @property
    def feature_count(self) -> int:
        return self.kernel_count * self.prototypes_per_kernel

    @property
    def channel_index(self) -> np.ndarray:
        return _channel_index(self.kernel_set, self.config.channel_mode)

    def prototype_set(self, kernel: int) -> PrototypeSet:
        """Prototype activations of one kernel, trimmed to its output length."""
        size = self.kernel_set.kernels[kernel].output_length(self.input_length)
        activations = self.prototype_activations[kernel, :, :, :size]
        if activations.shape[1] == 1:
            activations = activations[:, 0, :]
        return PrototypeSet(activations, self.source_indices[kernel])

    @property
    def prototype_sets(self) -> Tuple[PrototypeSet, ...]:
        return tuple(self.prototype_set(k) for k in range(self.kernel_count))

    def packed_measures(self):
        codes = np.array([m.code for m in self.measures], dtype=np.int64)
        params = np.stack([m.packed_params() for m in self.measures])
        windows = np.array([m.packed_window() for m in self.measures], dtype=np.int64)
        return codes, params, windows

    def columns(self, source: str = "sprocket"):
        return [ColumnDescriptor(source, k, j)
                for k in range(self.kernel_count)
                for j in range(self.prototypes_per_kernel)]

    def save(self, path: str) -> str:
        """
        Write the model as a compressed .npz with a JSON header.

        Args:
            path: Output file path

        Returns:
            Path to the written file
        """
        weights, lengths, biases, dilations, paddings, channels = self.kernel_set.packed()
        header = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "config": self.config.to_dict(),
            "measures": [m.to_dict() for m in self.measures],
            "input_length": self.input_length,
            "channel_count": self.channel_count,
        }
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "wb") as f:
            np.savez_compressed(
                f,
                header=np.array(json.dumps(header)),
                weights=weights, lengths=lengths, biases=biases,
                dilations=dilations, paddings=paddings, channels=channels,
                prototype_activations=self.prototype_activations,
                source_indices=self.source_indices,
            )
        return path

    @classmethod
    def load(cls, path: str) -> "PrototypeModel":
        try:
            with np.load(path, allow_pickle=False) as archive:
                header = json.loads(str(archive["header"]))
                arrays = {name: archive[name] for name in archive.files if name != "header"}
        except (OSError, ValueError, KeyError) as e:
            raise ModelFormatError(f"Error reading model file: {e}", path=path)

        if header.get("format") != MODEL_FORMAT:
            raise ModelFormatError("not a SPROCKET model file", path=path)
        if header.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {header.get('version')}",
                                   path=path, supported=MODEL_VERSION)
        try:
            kernel_set = KernelSet.from_packed(
                arrays["weights"], arrays["lengths"], arrays["biases"], arrays["dilations"],
                arrays["paddings"], arrays["channels"],
                header["input_length"], header["channel_count"])
            measures = tuple(DistanceMeasure(m["kind"], m["params"], m["window"])
                             for m in header["measures"])
            config = RunConfig.from_dict(header["config"])
            prototypes = arrays["prototype_activations"]
            sources = arrays["source_indices"]
        except KeyError as e:
            raise ModelFormatError(f"model file is missing {e}", path=path)
        if len(measures) != len(kernel_set) or prototypes.shape[0] != len(kernel_set):
            raise ModelFormatError("kernel, measure and prototype counts disagree", path=path)
        prototypes.setflags(write=False)
        sources.setflags(write=False)
        return cls(kernel_set, measures, prototypes, sources, config,
                   int(header["input_length"]), int(header["channel_count"]))


# -- fit / apply ------------------------------------------------------------------

def _measures_for(config: RunConfig, series_length: int) -> Tuple[DistanceMeasure, ...]:
    cache: Dict[str, DistanceMeasure] = {}
    measures = []
    for kind in config.kernel_measures():
        if kind not in cache:
            cache[kind] = config.measure(kind, series_length)
        measures.append(cache[kind])
    return tuple(measures)


def _kmeanspp_distance(code, params, window, size, calls):
    def distance(a, b):
        total = 0.0
        for c in range(a.shape[0]):
            total += distance_kernel(code, a[c, :size], b[c, :size], params, window)
        calls[0] += a.shape[0]
        return total
    return distance


def fit_sprocket(train: TimeSeriesDataset, config: RunConfig,
                 counter: Optional[DistanceCallCounter] = None,
                 source: str = "sprocket") -> Tuple[PrototypeModel, FeatureMatrix]:
    """
    Fit prototypes on the training set and return its feature matrix.

    Kernel i is drawn from stream ("kernel", i) and selects its prototypes
    with stream ("proto", i) of the configured seed.

    Args:
        train: Training dataset
        config: Validated run configuration
        counter: Distance counter to accumulate into (optional)
        source: Source tag for the column descriptors

    Returns:
        Tuple of (fitted PrototypeModel, training FeatureMatrix of shape (n, K·M))
    """
    counter = counter if counter is not None else DistanceCallCounter()
    before = counter.total
    configure_threads(config.thread_count)

    X = _as_array(train)
    n, channel_count, length = X.shape
    labels = train.labels if isinstance(train, TimeSeriesDataset) else np.zeros(n, dtype=np.int64)
    if config.normalize_input:
        X = np.ascontiguousarray(_znormalize(X))

    count = prototype_count(n, config.prototype_log_base)
    if count > n:
        raise TooFewInstances(f"cannot select {count} prototypes from {n} instances",
                              requested=count, available=n)

    root = RandomStream(config.seed)
    kernel_set = generate_kernels(config.kernel_count, length, channel_count, root)
    check_kernel_fit(kernel_set, length)
    measures = _measures_for(config, length)
    codes = np.array([m.code for m in measures], dtype=np.int64)
    params = np.stack([m.packed_params() for m in measures])
    windows = np.array([m.packed_window() for m in measures], dtype=np.int64)

    channel_index = _channel_index(kernel_set, config.channel_mode)
    width = channel_index.shape[1]
    output_lengths = kernel_set.output_lengths()
    packed = kernel_set.packed()
    strategy = SelectionStrategy(config.selection)

    K = len(kernel_set)
    prototypes = np.zeros((K, count, width, length))
    sources = np.zeros((K, count), dtype=np.int64)
    values = np.empty((n, K * count))
    timings = {"convolution_s": 0.0, "selection_s": 0.0, "distance_s": 0.0}
    chunk = _chunk_size(n, width, length, K)

    logger.info(f"Fitting SPROCKET: n={n}, channels={channel_count}, length={length}, "
                f"K={K}, M={count}, selection={strategy.kind}")

    for start in range(0, K, chunk):
        stop = min(K, start + chunk)

        started = time.perf_counter()
        block = _activations(X, packed, channel_index, start, stop, output_lengths,
                             config.normalize_activations)
        timings["convolution_s"] += time.perf_counter() - started

        started = time.perf_counter()
        for k in range(start, stop):
            stream = root.derive("proto", k)
            if strategy.uses_distances:
                calls = [0]
                distance = _kmeanspp_distance(codes[k], params[k], windows[k],
                                              output_lengths[k], calls)
                chosen = select_kmeanspp_init(block[k - start], count, distance, stream)
                counter.add(calls[0], "selection")
            else:
                chosen = select_indices(strategy, labels, count, stream)
            sources[k] = chosen
            prototypes[k] = block[k - start, chosen]
        timings["selection_s"] += time.perf_counter() - started

        started = time.perf_counter()
        out = np.empty((n, (stop - start) * count))
        calls = _distance_block(block, output_lengths[start:stop], prototypes[start:stop],
                                codes[start:stop], params[start:stop], windows[start:stop], out)
        values[:, start * count:stop * count] = out
        counter.add(int(calls.sum()), "transform")
        timings["distance_s"] += time.perf_counter() - started

    prototypes.setflags(write=False)
    sources.setflags(write=False)
    model = PrototypeModel(kernel_set, measures, prototypes, sources, config,
                           length, channel_count)
    fit_calls = counter.total - before
    logger.info(f"SPROCKET fit done: {fit_calls} distance calls, "
                f"{sum(timings.values()):.3f}s")
    return model, FeatureMatrix(values, model.columns(source), distance_calls=fit_calls,
                                timings=timings)


def apply_sprocket(model: PrototypeModel,
                   data: Union[TimeSeriesDataset, TimeSeries, np.ndarray],
                   counter: Optional[DistanceCallCounter] = None,
                   source: str = "sprocket") -> FeatureMatrix:
    """
    Distances from every series to every prototype of a fitted model.

    Args:
        model: Fitted PrototypeModel
        data: Dataset, single TimeSeries, or array of shape (n, channels, length)
        counter: Distance counter to accumulate into (optional)
        source: Source tag for the column descriptors

    Returns:
        FeatureMatrix of shape (n, K·M)
    """
    X = _as_array(data)
    n, channel_count, length = X.shape
    if channel_count != model.channel_count or length != model.input_length:
        raise ShapeMismatch("series shape does not match the fitted model",
                            channels=channel_count, length=length,
                            expected_channels=model.channel_count,
                            expected_length=model.input_length)

    counter = counter if counter is not None else DistanceCallCounter()
    before = counter.total
    config = model.config
    configure_threads(config.thread_count)
    if config.normalize_input:
        X = np.ascontiguousarray(_znormalize(X))

    kernel_set = model.kernel_set
    channel_index = model.channel_index
    width = channel_index.shape[1]
    output_lengths = kernel_set.output_lengths()
    packed = kernel_set.packed()
    codes, params, windows = model.packed_measures()
    count = model.prototypes_per_kernel

    K = model.kernel_count
    values = np.empty((n, K * count))
    timings = {"convolution_s": 0.0, "distance_s": 0.0}
    chunk = _chunk_size(n, width, length, K)

    for start in range(0, K, chunk):
        stop = min(K, start + chunk)

        started = time.perf_counter()
        block = _activations(X, packed, channel_index, start, stop, output_lengths,
                             config.normalize_activations)
        timings["convolution_s"] += time.perf_counter() - started

        started = time.perf_counter()
        out = np.empty((n, (stop - start) * count))
        calls = _distance_block(block, output_lengths[start:stop],
                                np.ascontiguousarray(model.prototype_activations[start:stop]),
                                codes[start:stop], params[start:stop], windows[start:stop], out)
        values[:, start * count:stop * count] = out
        counter.add(int(calls.sum()), "transform")
        timings["distance_s"] += time.perf_counter() - started

    return FeatureMatrix(values, model.columns(source), distance_calls=counter.total - before,
                         timings=timings)
