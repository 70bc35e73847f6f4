"""
Utility for writing and reading experiment results and their sidecar files.
"""
import csv
import json
import os
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional

import pandas as pd

from utils.errors import MissingColumns, OutputError

RESULT_FIELDS = ("dataset", "algorithm", "seed", "accuracy", "transform_s", "fit_s",
                 "predict_s", "distance_calls", "feature_count")
CORRECTNESS_FIELDS = ("dataset", "algorithm", "seed", "instance", "correct")
COST_FIELDS = ("dataset", "algorithm", "kernel_count", "predicted_calls", "observed_calls",
               "predicted_units", "predicted_s", "observed_s")
RESULT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class ResultRecord:
    """One (dataset, algorithm, seed) evaluation."""

    dataset: str
    algorithm: str
    seed: int
    accuracy: float
    transform_s: float
    fit_s: float
    predict_s: float
    distance_calls: int
    feature_count: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must lie in [0, 1], got {self.accuracy}")
        for name in ("transform_s", "fit_s", "predict_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.distance_calls < 0 or self.feature_count < 0:
            raise ValueError("counts must be nonnegative")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, row: Dict) -> "ResultRecord":
        missing = [name for name in RESULT_FIELDS if name not in row]
        if missing:
            raise MissingColumns(f"result row is missing {', '.join(missing)}", missing=missing)
        return cls(
            dataset=str(row["dataset"]),
            algorithm=str(row["algorithm"]),
            seed=int(row["seed"]),
            accuracy=float(row["accuracy"]),
            transform_s=float(row["transform_s"]),
            fit_s=float(row["fit_s"]),
            predict_s=float(row["predict_s"]),
            distance_calls=int(row["distance_calls"]),
            feature_count=int(row["feature_count"]),
        )


def resolve_format(output_file: str, format: Optional[str] = None) -> str:
    """
    Results format from an explicit choice or the file extension.

    Args:
        output_file: Path of the results file
        format: "json" or "csv" (optional)

    Returns:
        The lower-case format name
    """
    extension = os.path.splitext(output_file)[1].lstrip(".")
    chosen = (format or extension or "json").lower()
    if chosen not in RESULT_FORMATS:
        raise OutputError(f"unsupported results format '{chosen}' (use .json or .csv, or --format)",
                          path=output_file, formats=list(RESULT_FORMATS))
    return chosen


def _ensure_directory(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


class ResultsWriter:
    """Writer for result files and the correctness and cost sidecars."""

    def write_results(self, records: Iterable[ResultRecord], output_file: str,
                      format: Optional[str] = None) -> str:
        """
        Write result records as JSON (array of objects) or CSV.

        Args:
            records: Result records
            output_file: Path to the output file
            format: "json" or "csv" (defaults to the file extension)

        Returns:
            Path to the written file
        """
        format = resolve_format(output_file, format)
        records = list(records)
        try:
            _ensure_directory(output_file)
            if format == "json":
                with open(output_file, "w") as f:
                    json.dump([r.to_dict() for r in records], f, indent=2)
                    f.write("\n")
            else:
                with open(output_file, "w", newline="") as f:
                    writer = csv.DictWriter(f, fieldnames=list(RESULT_FIELDS))
                    writer.writeheader()
                    for record in records:
                        writer.writerow(record.to_dict())
            return output_file
        except OSError as e:
            raise OutputError(f"Error writing results: {str(e)}", path=output_file) from e

    def read_results(self, input_file: str) -> List[ResultRecord]:
        if input_file.lower().endswith(".json"):
            with open(input_file, "r") as f:
                rows = json.load(f)
            if not isinstance(rows, list):
                raise MissingColumns("results JSON must be an array of objects")
        else:
            with open(input_file, "r", newline="") as f:
                reader = csv.DictReader(f)
                missing = [c for c in RESULT_FIELDS if c not in (reader.fieldnames or [])]
                if missing:
                    raise MissingColumns(f"results CSV is missing {', '.join(missing)}",
                                         missing=missing)
                rows = list(reader)
        return [ResultRecord.from_dict(row) for row in rows]

    def write_correctness(self, rows: Iterable[Dict], output_file: str) -> str:
        """
        Write per-instance correctness rows (dataset, algorithm, seed, instance, correct).

        Args:
            rows: Row dictionaries
            output_file: Path to the sidecar CSV

        Returns:
            Path to the written file
        """
        return self._write_rows(rows, output_file, CORRECTNESS_FIELDS)

    def write_costs(self, rows: Iterable[Dict], output_file: str) -> str:
        return self._write_rows(rows, output_file, COST_FIELDS)

    def _write_rows(self, rows: Iterable[Dict], output_file: str, fieldnames) -> str:
        try:
            _ensure_directory(output_file)
            with open(output_file, "w", newline="") as f:
                writer = csv.DictWriter(f, fieldnames=list(fieldnames))
                writer.writeheader()
                for row in rows:
                    writer.writerow(row)
            return output_file
        except OSError as e:
            raise OutputError(f"Error writing {os.path.basename(output_file)}: {str(e)}",
                              path=output_file) from e

    def read_correctness(self, input_file: str) -> pd.DataFrame:
        frame = pd.read_csv(input_file, dtype={"dataset": str, "algorithm": str})
        missing = [c for c in CORRECTNESS_FIELDS if c not in frame.columns]
        if missing:
            raise MissingColumns(f"correctness sidecar is missing {', '.join(missing)}",
                                 missing=missing)
        return frame

    def format_results_for_display(self, records: List[ResultRecord]) -> str:
        """
        Format records as a markdown table for the UI.

        Args:
            records: Result records

        Returns:
            Markdown table
        """
        if not records:
            return "No results yet."

        result = "| Dataset | Algorithm | Seed | Accuracy | Transform (s) | Fit (s) | Predict (s) | Distance calls |\n"
        result += "|---------|-----------|------|----------|---------------|---------|-------------|----------------|\n"

        for r in records:
            result += (f"| {r.dataset} | {r.algorithm} | {r.seed} | {r.accuracy:.4f} | "
                       f"{r.transform_s:.3f} | {r.fit_s:.3f} | {r.predict_s:.3f} | "
                       f"{r.distance_calls} |\n")

        return result


def records_frame(records: Iterable[ResultRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.to_dict() for r in records], columns=list(RESULT_FIELDS))


def sidecar_path(results_path: str, kind: str) -> str:
    """<stem>.<kind>.<ext> next to a results file, e.g. run.correctness.csv."""
    stem = os.path.splitext(results_path)[0]
    extension = "toml" if kind == "config" else "csv"
    return f"{stem}.{kind}.{extension}"


def write_results(records: Iterable[ResultRecord], output_file: str,
                  format: Optional[str] = None) -> str:
    return ResultsWriter().write_results(records, output_file, format)


def read_results(input_file: str) -> List[ResultRecord]:
    return ResultsWriter().read_results(input_file)
