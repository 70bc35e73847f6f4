"""
Dense feature matrices with per-column provenance.
"""
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Sequence, Union

import numpy as np
import pandas as pd

from utils.errors import RowMismatch


class ColumnDescriptor(NamedTuple):
    """Where a feature column came from: (source, kernel index, prototype index or pooling name)."""

    source: str
    kernel: int
    item: Union[int, str]

    def label(self) -> str:
        return f"{self.source}:k{self.kernel}:{self.item}"


@dataclass(eq=False)
class FeatureMatrix:
    """Feature values (rows = instances) plus column descriptors and run accounting."""

    values: np.ndarray
    columns: List[ColumnDescriptor]
    distance_calls: int = 0
    timings: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("feature values must be a 2-D matrix")
        if self.values.shape[1] != len(self.columns):
            raise ValueError(f"{self.values.shape[1]} columns but {len(self.columns)} descriptors")

    @property
    def shape(self):
        return self.values.shape

    @property
    def sources(self) -> List[str]:
        seen = []
        for column in self.columns:
            if column.source not in seen:
                seen.append(column.source)
        return seen

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=[c.label() for c in self.columns])

    def to_csv(self, path: str) -> str:
        """
        Write the matrix to CSV with one header label per column.

        Args:
            path: Output CSV path

        Returns:
            Path to the written file
        """
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path


def concat_features(matrices: Sequence[FeatureMatrix]) -> FeatureMatrix:
    """
    Join feature matrices column-wise for a single downstream classifier.

    Columns are appended in argument order. Source tags that repeat across
    inputs get a ``#<position>`` suffix so every column stays traceable.

    Args:
        matrices: Feature matrices with equal row counts

    Returns:
        Concatenated feature matrix
    """
    matrices = list(matrices)
    if not matrices:
        raise RowMismatch("nothing to concatenate")
    rows = {m.values.shape[0] for m in matrices}
    if len(rows) != 1:
        raise RowMismatch("feature matrices differ in row count", rows=sorted(rows))
    if len(matrices) == 1:
        return matrices[0]

    counts: Dict[str, int] = {}
    for m in matrices:
        for source in m.sources:
            counts[source] = counts.get(source, 0) + 1

    columns: List[ColumnDescriptor] = []
    timings: Dict[str, float] = {}
    for position, m in enumerate(matrices):
        for column in m.columns:
            source = column.source
            if counts[source] > 1:
                source = f"{source}#{position}"
            columns.append(ColumnDescriptor(source, column.kernel, column.item))
        for phase, seconds in m.timings.items():
            timings[phase] = timings.get(phase, 0.0) + seconds

    values = np.concatenate([m.values for m in matrices], axis=1)
    return FeatureMatrix(values, columns,
                         distance_calls=sum(m.distance_calls for m in matrices),
                         timings=timings)
