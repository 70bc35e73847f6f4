"""
Parsers for UCR/UEA-style dataset files (.ts and univariate .csv).
"""
import csv
import io
import math
import os
import re
from typing import IO, Dict, List, Optional, Tuple, Union

import numpy as np

from utils.dataset import TimeSeriesDataset, encode_labels
from utils.errors import (DatasetError, InvalidDataset, MalformedHeader,
                          NonNumericCell, RaggedLengths, SprocketError,
                          UnknownClassLabel)

Source = Union[str, bytes, IO]

CSV_LAYOUTS = ("label_first", "label_last")


def _read_text(source: Source) -> Tuple[str, str]:
    """Return (text, name) for a path, raw bytes, or an (uploaded) file object."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as f:
            raw = f.read()
        name = os.path.splitext(os.path.basename(source))[0]
    elif isinstance(source, bytes):
        raw, name = source, "dataset"
    else:
        raw = source.read()
        name = os.path.splitext(os.path.basename(getattr(source, "name", "dataset")))[0]
    if isinstance(raw, str):
        return raw, name
    try:
        return raw.decode("utf-8-sig"), name
    except UnicodeDecodeError as e:
        raise MalformedHeader(f"file is not valid UTF-8 text: {e.reason}", position=e.start)


def _parse_value(cell: str, line: int, column: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise NonNumericCell(f"'{cell.strip()[:20]}' is not a number", line=line, column=column)
    if not math.isfinite(value):
        raise NonNumericCell("missing or non-finite values are not supported",
                             line=line, column=column)
    return value


class TsParser:
    """Parser for the sktime/aeon .ts layout: @ directives, then one record per line."""

    def __init__(self):
        """Initialize the .ts parser."""
        self.directive_pattern = re.compile(r'^@(\w+)\s*(.*)$')
        self.boolean_values = {"true": True, "false": False}
        self.ignored_directives = {"timestamps", "missing"}

    def parse_ts(self, source: Source) -> TimeSeriesDataset:
        """
        Parse a .ts file into a validated dataset.

        Args:
            source: Path to the .ts file, raw bytes, or a file-like object

        Returns:
            TimeSeriesDataset with labels encoded to dense integers
        """
        try:
            text, name = _read_text(source)
            return self._parse_text(text, name)
        except (SprocketError, OSError):
            raise
        except Exception as e:
            raise MalformedHeader(f"Error parsing .ts file: {str(e)}")

    def _boolean(self, directive: str, value: str, line: int) -> bool:
        flag = self.boolean_values.get(value.strip().lower())
        if flag is None:
            raise MalformedHeader(f"@{directive} expects true or false", line=line)
        return flag

    def _parse_header(self, lines: List[str]) -> Tuple[Dict, int]:
        header = {"problem_name": None, "univariate": None, "dimensions": None,
                  "series_length": None, "class_labels": None}
        for number, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            match = self.directive_pattern.match(stripped)
            if not match:
                raise MalformedHeader("expected a @ directive before @data", line=number)
            directive, value = match.group(1).lower(), match.group(2).strip()

            if directive == "data":
                if header["class_labels"] is None:
                    raise MalformedHeader("@classLabel must be declared before @data", line=number)
                return header, number
            if directive in self.ignored_directives:
                continue
            if directive == "problemname":
                header["problem_name"] = value or None
            elif directive == "univariate":
                header["univariate"] = self._boolean(directive, value, number)
            elif directive == "dimensions":
                if not value.isdigit() or int(value) < 1:
                    raise MalformedHeader("@dimensions expects a positive integer", line=number)
                header["dimensions"] = int(value)
            elif directive == "equallength":
                if not self._boolean(directive, value, number):
                    raise MalformedHeader("unequal-length datasets are not supported", line=number)
            elif directive == "serieslength":
                if not value.isdigit():
                    raise MalformedHeader("@seriesLength expects a positive integer", line=number)
                header["series_length"] = int(value)
            elif directive == "classlabel":
                tokens = value.split()
                if not tokens or not self._boolean(directive, tokens[0], number):
                    raise MalformedHeader("only classification problems with @classLabel true "
                                          "are supported", line=number)
                if len(tokens) < 2:
                    raise MalformedHeader("@classLabel true must list the class labels", line=number)
                header["class_labels"] = tokens[1:]
            elif directive == "targetlabel":
                raise MalformedHeader("regression problems are not supported", line=number)
            else:
                raise MalformedHeader(f"unknown directive @{match.group(1)}", line=number)
        raise MalformedHeader("missing @data section")

    def _parse_text(self, text: str, name: str) -> TimeSeriesDataset:
        lines = text.splitlines()
        if not any(line.strip() for line in lines):
            raise MalformedHeader("file is empty")
        header, data_line = self._parse_header(lines)
        declared = set(header["class_labels"])

        expected_channels = header["dimensions"]
        if header["univariate"]:
            expected_channels = 1
        expected_length = header["series_length"]

        records: List[np.ndarray] = []
        raw_labels: List[str] = []
        for number in range(data_line + 1, len(lines) + 1):
            line = lines[number - 1].strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(":")
            if len(parts) < 2:
                raise MalformedHeader("record has no class label", line=number)
            label = parts[-1].strip()
            if label not in declared:
                raise UnknownClassLabel(f"class label '{label}' is not declared in @classLabel",
                                        line=number)
            channels = []
            for channel, cells in enumerate(parts[:-1]):
                values = [_parse_value(cell, number, column)
                          for column, cell in enumerate(cells.split(","), start=1)]
                channels.append(values)

            if expected_channels is None:
                expected_channels = len(channels)
            if len(channels) != expected_channels:
                raise RaggedLengths(f"record has {len(channels)} channels, expected "
                                    f"{expected_channels}", line=number)
            lengths = {len(values) for values in channels}
            if len(lengths) != 1:
                raise RaggedLengths("channels of one record differ in length", line=number)
            length = lengths.pop()
            if expected_length is None:
                expected_length = length
            if length != expected_length:
                raise RaggedLengths(f"record has {length} values, expected {expected_length}",
                                    line=number)
            records.append(np.array(channels, dtype=np.float64))
            raw_labels.append(label)

        return _build_dataset(records, raw_labels, header["problem_name"] or name)

    def parse_csv(self, source: Source, layout: str = "label_last",
                  has_header: bool = False) -> TimeSeriesDataset:
        """
        Parse a univariate CSV: one series per row plus a label column.

        Args:
            source: Path, raw bytes, or file-like object
            layout: "label_first" or "label_last"
            has_header: Skip the first non-empty row

        Returns:
            Univariate TimeSeriesDataset
        """
        if layout not in CSV_LAYOUTS:
            raise ValueError(f"layout must be one of {CSV_LAYOUTS}")
        try:
            text, name = _read_text(source)
            return self._parse_csv_text(text, name, layout, has_header)
        except (SprocketError, OSError):
            raise
        except Exception as e:
            raise MalformedHeader(f"Error parsing CSV file: {str(e)}")

    def _parse_csv_text(self, text: str, name: str, layout: str,
                        has_header: bool) -> TimeSeriesDataset:
        rows = [(number, row) for number, row in enumerate(csv.reader(io.StringIO(text)), start=1)
                if any(cell.strip() for cell in row)]
        if has_header and rows:
            rows = rows[1:]
        if not rows:
            raise MalformedHeader("file is empty")

        records: List[np.ndarray] = []
        raw_labels: List[str] = []
        expected_length = None
        for number, row in rows:
            if len(row) < 2:
                raise RaggedLengths("row needs a label and at least one value", line=number)
            if layout == "label_first":
                label, cells, offset = row[0], row[1:], 2
            else:
                label, cells, offset = row[-1], row[:-1], 1
            values = [_parse_value(cell, number, column)
                      for column, cell in enumerate(cells, start=offset)]
            if expected_length is None:
                expected_length = len(values)
            if len(values) != expected_length:
                raise RaggedLengths(f"row has {len(values)} values, expected {expected_length}",
                                    line=number)
            records.append(np.array([values], dtype=np.float64))
            raw_labels.append(label.strip())

        return _build_dataset(records, raw_labels, name)


def _build_dataset(records: List[np.ndarray], raw_labels: List[str], name: str) -> TimeSeriesDataset:
    if len(records) < 2:
        raise InvalidDataset("dataset needs at least 2 series", name=name, n=len(records))
    labels, class_names = encode_labels(raw_labels)
    try:
        return TimeSeriesDataset(np.stack(records), labels, name=name, class_names=class_names)
    except DatasetError:
        raise
    except Exception as e:
        raise InvalidDataset(f"Error building dataset: {str(e)}", name=name)


def parse_ts(source: Source) -> TimeSeriesDataset:
    return TsParser().parse_ts(source)


def parse_csv(source: Source, layout: str = "label_last", has_header: bool = False) -> TimeSeriesDataset:
    return TsParser().parse_csv(source, layout, has_header)


def load_dataset(path: str, csv_layout: str = "label_last") -> TimeSeriesDataset:
    """Parse a dataset file, choosing the parser by extension."""
    if path.lower().endswith(".csv"):
        return parse_csv(path, csv_layout)
    return parse_ts(path)


def format_ts(dataset: TimeSeriesDataset, problem_name: Optional[str] = None) -> str:
    """
    Render a dataset in .ts layout.

    Args:
        dataset: Dataset to render
        problem_name: Name for @problemName (defaults to the dataset name)

    Returns:
        .ts file text
    """
    lines = [
        f"@problemName {problem_name or dataset.name}",
        "@timeStamps false",
        "@missing false",
        f"@univariate {'true' if dataset.channels == 1 else 'false'}",
    ]
    if dataset.channels > 1:
        lines.append(f"@dimensions {dataset.channels}")
    lines += [
        "@equalLength true",
        f"@seriesLength {dataset.length}",
        f"@classLabel true {' '.join(dataset.class_names)}",
        "@data",
    ]
    raw = dataset.raw_labels()
    for i in range(dataset.n):
        channels = [",".join(repr(float(v)) for v in dataset.data[i, c])
                    for c in range(dataset.channels)]
        lines.append(":".join(channels) + f":{raw[i]}")
    return "\n".join(lines) + "\n"


def write_ts(dataset: TimeSeriesDataset, path: str, problem_name: Optional[str] = None) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write(format_ts(dataset, problem_name))
    return path
