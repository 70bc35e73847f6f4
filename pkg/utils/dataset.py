"""
Data model for labeled, equal-length, possibly multichannel time series.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import InvalidDataset, UnknownClassLabel

MIN_SERIES_LENGTH = 9


def _label_sort_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def encode_labels(raw_labels: Sequence) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """
    Re-encode heterogeneous labels to dense integers 0..c-1.

    Numeric labels are ordered numerically, everything else lexically, so the
    same labels always map to the same integers whichever file they came from.

    Args:
        raw_labels: Original labels (strings or numbers)

    Returns:
        Tuple of (integer labels, class names ordered by code)
    """
    names = [str(label) for label in raw_labels]
    class_names = tuple(sorted(set(names), key=_label_sort_key))
    index = {name: i for i, name in enumerate(class_names)}
    return np.array([index[name] for name in names], dtype=np.int64), class_names


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One series of shape (channels, length)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[np.newaxis, :]
        if values.ndim != 2 or values.shape[0] < 1:
            raise InvalidDataset("series must be a 2-D array (channels, length)", shape=values.shape)
        if values.shape[1] < MIN_SERIES_LENGTH:
            raise InvalidDataset(f"series length must be at least {MIN_SERIES_LENGTH}",
                                 length=values.shape[1])
        if not np.all(np.isfinite(values)):
            raise InvalidDataset("series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class TimeSeriesDataset:
    """Labeled collection of equal-length series, stored as one (n, m, l) array."""

    data: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    class_names: Optional[Tuple[str, ...]] = None
    source: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, np.newaxis, :]
        if data.ndim != 3:
            raise InvalidDataset("dataset must have shape (n, channels, length)", name=self.name)
        n, m, l = data.shape
        if n < 2:
            raise InvalidDataset("dataset needs at least 2 series", name=self.name, n=n)
        if m < 1:
            raise InvalidDataset("dataset needs at least one channel", name=self.name)
        if l < MIN_SERIES_LENGTH:
            raise InvalidDataset(f"series length must be at least {MIN_SERIES_LENGTH}",
                                 name=self.name, length=l)
        if not np.all(np.isfinite(data)):
            raise InvalidDataset("dataset contains non-finite values", name=self.name)

        labels = np.asarray(self.labels)
        if labels.shape != (n,):
            raise InvalidDataset("need exactly one label per series", name=self.name,
                                 n=n, labels=int(labels.size))
        if not np.issubdtype(labels.dtype, np.integer):
            raise InvalidDataset("labels must be dense integers", name=self.name)
        labels = labels.astype(np.int64)
        classes = int(labels.max()) + 1 if n else 0
        if labels.min() < 0 or np.unique(labels).size != classes:
            raise InvalidDataset("every class in 0..c-1 must occur at least once", name=self.name)

        class_names = self.class_names
        if class_names is None:
            class_names = tuple(str(i) for i in range(classes))
        class_names = tuple(str(c) for c in class_names)
        if len(class_names) != classes:
            raise InvalidDataset("class name count does not match label codes", name=self.name,
                                 classes=classes, class_names=len(class_names))

        data.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", class_names)

    @classmethod
    def from_series(cls, series: List[TimeSeries], raw_labels: Sequence,
                    name: str = "dataset") -> "TimeSeriesDataset":
        """
        Build a dataset from individual series and original labels.

        Args:
            series: List of TimeSeries with identical shape
            raw_labels: Original class labels, re-encoded to dense integers
            name: Dataset name

        Returns:
            Validated dataset
        """
        if len(series) != len(raw_labels):
            raise InvalidDataset("need exactly one label per series", name=name,
                                 n=len(series), labels=len(raw_labels))
        shapes = {s.values.shape for s in series}
        if len(shapes) > 1:
            raise InvalidDataset("series differ in channel count or length", name=name,
                                 shapes=sorted(shapes))
        labels, class_names = encode_labels(raw_labels)
        data = np.stack([s.values for s in series]) if series else np.empty((0, 1, 0))
        return cls(data, labels, name=name, class_names=class_names)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def length(self) -> int:
        return self.data.shape[2]

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    def __len__(self) -> int:
        return self.n

    def series(self, index: int) -> TimeSeries:
        return TimeSeries(self.data[index])

    def raw_labels(self) -> List[str]:
        return [self.class_names[i] for i in self.labels]

    def encode_against(self, class_names: Sequence[str]) -> np.ndarray:
        """
        Express this dataset's labels in another dataset's integer coding.

        Args:
            class_names: Class names of the reference (training) dataset

        Returns:
            Integer labels in the reference coding
        """
        index = {str(name): i for i, name in enumerate(class_names)}
        codes = []
        for row, name in enumerate(self.raw_labels()):
            if name not in index:
                raise UnknownClassLabel(f"class label '{name}' does not occur in the training data",
                                        dataset=self.name, row=row)
            codes.append(index[name])
        return np.array(codes, dtype=np.int64)
