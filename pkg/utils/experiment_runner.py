"""
Evaluation and benchmark runs over algorithms built from transform parts.

An algorithm name is one or more parts joined by "+": "rocket",
"sprocket" (the configured distance spec), "sprocket-<measure>" or
"sprocket-<preset>". A trailing "@K" overrides the kernel count. Parts
compute their train and test features once per (dataset, seed, part, K) and
are shared by every algorithm that names them; an ensemble concatenates its
parts' features under one ridge classifier.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.dataset import TimeSeriesDataset
from utils.distances import MEASURE_CODES
from utils.ensemble_analysis import (calibrate, predict_distance_calls,
                                     predict_transform_cost)
from utils.error_logger import ErrorLogger
from utils.errors import ConfigError, SprocketError
from utils.feature_matrix import FeatureMatrix, concat_features
from utils.kernels import generate_kernels, rocket_transform
from utils.manifest_parser import DatasetManifest
from utils.random_stream import RandomStream
from utils.results_writer import ResultRecord
from utils.ridge_classifier import accuracy, correctness, fit_ridge_cv
from utils.run_config import DISTANCE_PRESETS, RunConfig, parse_distance_spec
from utils.sprocket_transform import DistanceCallCounter, apply_sprocket, fit_sprocket
from utils.ts_parser import load_dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlgorithmPart:
    kind: str
    distance: Optional[str] = None

    @property
    def name(self) -> str:
        return self.kind if self.distance is None else f"{self.kind}-{self.distance}"


def parse_algorithm(name: str) -> Tuple[Tuple[AlgorithmPart, ...], Optional[int]]:
    """
    Split an algorithm name into its parts and optional kernel count.

    Args:
        name: e.g. "rocket+sprocket-msm@1024"

    Returns:
        Tuple of (parts, kernel count or None)
    """
    text = str(name).strip().lower()
    kernel_count = None
    if "@" in text:
        text, _, count = text.rpartition("@")
        if not count.isdigit() or int(count) < 1:
            raise ConfigError(f"invalid kernel count in algorithm '{name}'", algorithm=name)
        kernel_count = int(count)
    parts = []
    for token in text.split("+"):
        token = token.strip()
        if token in ("rocket", "sprocket"):
            parts.append(AlgorithmPart(token))
        elif token.startswith("sprocket-"):
            distance = token[len("sprocket-"):]
            if distance not in MEASURE_CODES and distance not in DISTANCE_PRESETS:
                raise ConfigError(f"unknown distance '{distance}' in algorithm '{name}'",
                                  algorithm=name)
            parts.append(AlgorithmPart("sprocket", distance))
        else:
            raise ConfigError(f"unknown algorithm part '{token}'", algorithm=name)
    if len(set(parts)) != len(parts):
        raise ConfigError(f"algorithm '{name}' repeats a part", algorithm=name)
    return tuple(parts), kernel_count


def expand_sweep(algorithms: Sequence[str], kernel_counts: Optional[Sequence[int]]) -> List[str]:
    """Repeat every algorithm once per kernel count as "<algorithm>@<K>"."""
    if not kernel_counts:
        return list(algorithms)
    return [f"{a}@{k}" for a in algorithms for k in kernel_counts]


@dataclass
class PartFeatures:
    """Train and test features of one transform part."""

    train: FeatureMatrix
    test: FeatureMatrix
    transform_s: float
    fit_calls: int
    config: Optional[RunConfig] = None


@dataclass
class RunOutput:
    records: List[ResultRecord] = field(default_factory=list)
    correctness: List[Dict] = field(default_factory=list)
    costs: List[Dict] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    def extend(self, other: "RunOutput") -> None:
        self.records.extend(other.records)
        self.correctness.extend(other.correctness)
        self.costs.extend(other.costs)
        self.skipped.extend(other.skipped)


class ExperimentRunner:
    """Runs algorithms on train/test pairs and collects records, correctness and costs."""

    def __init__(self, config: RunConfig, error_logger: Optional[ErrorLogger] = None,
                 emit_correctness: bool = False):
        """
        Initialize the runner.

        Args:
            config: Base run configuration (seed and kernel count are overridden per run)
            error_logger: Collector for per-dataset errors (optional)
            emit_correctness: Keep per-instance correctness rows
        """
        self.config = config
        self.error_logger = error_logger or ErrorLogger()
        self.emit_correctness = emit_correctness
        self.counter = DistanceCallCounter()
        self._cache: Dict[Tuple, PartFeatures] = {}
        self._seconds_per_unit: Optional[float] = None

    # -- parts ----------------------------------------------------------------

    def _part_config(self, part: AlgorithmPart, seed: int, kernel_count: int) -> RunConfig:
        changes = {"seed": seed, "kernel_count": kernel_count}
        if part.distance is not None:
            changes["distance_spec"] = parse_distance_spec(part.distance, kernel_count)
        return self.config.with_overrides(**changes)

    def part_features(self, part: AlgorithmPart, train: TimeSeriesDataset,
                      test: TimeSeriesDataset, seed: int, kernel_count: int) -> PartFeatures:
        key = (train.name, seed, part, kernel_count)
        if key in self._cache:
            return self._cache[key]

        if part.kind == "rocket":
            stream = RandomStream(seed).derive("rocket", 0)
            kernel_set = generate_kernels(kernel_count, train.length, train.channels, stream)
            train_features = rocket_transform(train, kernel_set)
            test_features = rocket_transform(test, kernel_set)
            features = PartFeatures(train_features, test_features,
                                    sum(train_features.timings.values())
                                    + sum(test_features.timings.values()), 0)
        else:
            config = self._part_config(part, seed, kernel_count)
            model, train_features = fit_sprocket(train, config, self.counter, source=part.name)
            test_features = apply_sprocket(model, test, self.counter, source=part.name)
            features = PartFeatures(train_features, test_features,
                                    sum(train_features.timings.values())
                                    + sum(test_features.timings.values()),
                                    train_features.distance_calls, config)
        self._cache[key] = features
        return features

    def clear_cache(self) -> None:
        self._cache.clear()

    # -- evaluation -------------------------------------------------------------

    def evaluate(self, train: TimeSeriesDataset, test: TimeSeriesDataset, algorithm: str,
                 seed: int) -> RunOutput:
        """
        Fit one algorithm on train and score it on test.

        Args:
            train: Training dataset
            test: Test dataset with the same shape
            algorithm: Algorithm name
            seed: Seed for this run

        Returns:
            RunOutput with one ResultRecord
        """
        parts, kernel_count = parse_algorithm(algorithm)
        kernel_count = kernel_count or self.config.kernel_count
        truth = test.encode_against(train.class_names)

        features = [self.part_features(p, train, test, seed, kernel_count) for p in parts]
        train_matrix = concat_features([f.train for f in features])
        test_matrix = concat_features([f.test for f in features])

        model = fit_ridge_cv(train_matrix, train.labels, self.config.alphas,
                             self.config.standardize_features)
        started = time.perf_counter()
        predicted = model.predict(test_matrix)
        predict_s = time.perf_counter() - started

        record = ResultRecord(
            dataset=train.name,
            algorithm=algorithm,
            seed=seed,
            accuracy=accuracy(predicted, truth),
            transform_s=sum(f.transform_s for f in features),
            fit_s=model.fit_seconds,
            predict_s=predict_s,
            distance_calls=sum(f.fit_calls for f in features),
            feature_count=train_matrix.shape[1],
        )
        output = RunOutput(records=[record])
        if self.emit_correctness:
            for instance, value in enumerate(correctness(predicted, truth)):
                output.correctness.append({"dataset": train.name, "algorithm": algorithm,
                                           "seed": seed, "instance": instance,
                                           "correct": int(value)})
        output.costs.extend(self._cost_rows(train, algorithm, parts, features))
        logger.info(f"{train.name} {algorithm} seed={seed}: accuracy={record.accuracy:.4f}")
        return output

    def _cost_rows(self, train, algorithm, parts, features) -> List[Dict]:
        rows = []
        for part, part_features in zip(parts, features):
            config = part_features.config
            if config is None:
                continue
            channels = train.channels if config.channel_mode == "independent" else 1
            length = train.length
            units = sum(predict_transform_cost(share, train.n, config.prototype_log_base,
                                               channels, length,
                                               config.window_for_length(length), measure)
                        for measure, share in config.distance_spec)
            observed = part_features.train.timings.get("distance_s", 0.0)
            if self._seconds_per_unit is None and observed > 0:
                self._seconds_per_unit = calibrate(units, observed)
            rows.append({
                "dataset": train.name,
                "algorithm": f"{algorithm}:{part.name}" if len(parts) > 1 else algorithm,
                "kernel_count": config.kernel_count,
                "predicted_calls": predict_distance_calls(config.kernel_count, train.n,
                                                          config.prototype_log_base, channels),
                "observed_calls": part_features.fit_calls,
                "predicted_units": units,
                "predicted_s": (units * self._seconds_per_unit
                                if self._seconds_per_unit is not None else None),
                "observed_s": observed,
            })
        return rows

    def run_dataset(self, train: TimeSeriesDataset, test: TimeSeriesDataset,
                    algorithms: Sequence[str], seeds: Sequence[int]) -> RunOutput:
        """Every algorithm for every seed on one dataset; the part cache is dropped afterwards."""
        output = RunOutput()
        try:
            for seed in seeds:
                for algorithm in algorithms:
                    output.extend(self.evaluate(train, test, algorithm, seed))
        finally:
            self.clear_cache()
        return output

    def benchmark(self, manifest: DatasetManifest, algorithms: Sequence[str],
                  seeds: Sequence[int], skip_missing: bool = False) -> RunOutput:
        """
        Run a manifest suite one dataset at a time.

        Dataset-level failures are logged and the suite moves on; missing
        files are skipped with a warning when skip_missing is set.

        Args:
            manifest: Parsed manifest
            algorithms: Algorithm names
            seeds: Seeds to run
            skip_missing: Skip entries whose files do not exist

        Returns:
            Combined RunOutput
        """
        for algorithm in algorithms:
            parse_algorithm(algorithm)

        output = RunOutput()
        for entry in manifest:
            missing = entry.missing_files()
            if missing and skip_missing:
                logger.warning(f"Skipping {entry.name}: missing {', '.join(missing)}")
                output.skipped.append(entry.name)
                continue
            try:
                if missing:
                    raise FileNotFoundError(f"missing dataset files: {', '.join(missing)}")
                train = load_dataset(entry.train_path)
                test = load_dataset(entry.test_path)
                entry.validate(train, test)
                if train.name != entry.name:
                    train = _renamed(train, entry.name)
                output.extend(self.run_dataset(train, test, algorithms, seeds))
            except (SprocketError, OSError, MemoryError) as e:
                self.error_logger.log_error("dataset", f"{entry.name}: {e}",
                                            {"dataset": entry.name, "exception": e})
        return output


def _renamed(dataset: TimeSeriesDataset, name: str) -> TimeSeriesDataset:
    return TimeSeriesDataset(dataset.data, dataset.labels, name=name,
                             class_names=dataset.class_names, source=dataset.source)


def seeds_for(seed: int, repeats: int) -> List[int]:
    if repeats < 1:
        raise ConfigError("repeats must be positive", option="repeats", value=repeats)
    return [seed + i for i in range(repeats)]


def mean_record(records: Sequence[ResultRecord]) -> Dict:
    """Mean accuracy, times and counts over repeated runs of one algorithm."""
    if not records:
        return {}
    summary = {"dataset": records[0].dataset, "algorithm": records[0].algorithm,
               "runs": len(records)}
    for name in ("accuracy", "transform_s", "fit_s", "predict_s", "distance_calls",
                 "feature_count"):
        summary[name] = float(np.mean([getattr(r, name) for r in records]))
    return summary
