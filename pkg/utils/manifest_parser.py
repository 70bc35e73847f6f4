"""
Benchmark manifests: TOML lists of train/test dataset pairs with expected metadata.

    [[datasets]]
    name = "Coffee"
    train = "Coffee/Coffee_TRAIN.ts"
    test = "Coffee/Coffee_TEST.ts"
    train_size = 28
    test_size = 28
    length = 286
    classes = 2
"""
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

import toml

from utils.dataset import TimeSeriesDataset
from utils.errors import InvalidDataset, ManifestError

EXPECTED_FIELDS = ("train_size", "test_size", "length", "channels", "classes")


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    train_path: str
    test_path: str
    train_size: Optional[int] = None
    test_size: Optional[int] = None
    length: Optional[int] = None
    channels: Optional[int] = None
    classes: Optional[int] = None

    def missing_files(self) -> List[str]:
        return [p for p in (self.train_path, self.test_path) if not os.path.isfile(p)]

    def validate(self, train: TimeSeriesDataset, test: TimeSeriesDataset) -> None:
        """
        Check parsed datasets against the expected metadata.

        Args:
            train: Parsed training split
            test: Parsed test split

        Raises:
            InvalidDataset: naming every mismatching field
        """
        observed = {
            "train_size": train.n,
            "test_size": test.n,
            "length": train.length,
            "channels": train.channels,
            "classes": train.class_count,
        }
        mismatches = {}
        for name, value in observed.items():
            expected = getattr(self, name)
            if expected is not None and expected != value:
                mismatches[name] = {"expected": expected, "observed": value}
        if test.length != train.length or test.channels != train.channels:
            mismatches["test_shape"] = {"expected": [train.channels, train.length],
                                        "observed": [test.channels, test.length]}
        if mismatches:
            raise InvalidDataset(f"dataset '{self.name}' does not match its manifest entry",
                                 dataset=self.name, mismatches=mismatches)


@dataclass(frozen=True)
class DatasetManifest:
    entries: Tuple[ManifestEntry, ...]
    path: Optional[str] = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def names(self) -> List[str]:
        return [e.name for e in self.entries]


class ManifestParser:
    """Parser for benchmark manifest files."""

    def parse_manifest(self, manifest_file: str) -> DatasetManifest:
        """
        Parse a manifest; relative paths resolve against the manifest's directory.

        Args:
            manifest_file: Path to the TOML manifest

        Returns:
            DatasetManifest
        """
        try:
            with open(manifest_file, "r") as f:
                data = toml.load(f)
        except (OSError, toml.TomlDecodeError) as e:
            raise ManifestError(f"Error parsing manifest: {str(e)}", path=manifest_file)
        base = os.path.dirname(os.path.abspath(manifest_file))
        return self.parse_data(data, base, manifest_file)

    def parse_data(self, data: dict, base: str = ".", path: Optional[str] = None) -> DatasetManifest:
        raw_entries = data.get("datasets")
        if not isinstance(raw_entries, list) or not raw_entries:
            raise ManifestError("manifest needs at least one [[datasets]] table", path=path)

        entries = []
        names = set()
        paths = set()
        for index, raw in enumerate(raw_entries):
            if not isinstance(raw, dict):
                raise ManifestError("each [[datasets]] entry must be a table", entry=index)
            missing = [key for key in ("name", "train", "test") if not raw.get(key)]
            if missing:
                raise ManifestError(f"entry {index} is missing {', '.join(missing)}", entry=index)
            unknown = sorted(set(raw) - {"name", "train", "test", *EXPECTED_FIELDS})
            if unknown:
                raise ManifestError(f"entry {index} has unknown keys: {', '.join(unknown)}",
                                    entry=index)

            name = str(raw["name"])
            if name in names:
                raise ManifestError(f"dataset '{name}' is listed twice", entry=index)
            names.add(name)

            train = os.path.normpath(os.path.join(base, str(raw["train"])))
            test = os.path.normpath(os.path.join(base, str(raw["test"])))
            for p in (train, test):
                if p in paths:
                    raise ManifestError(f"path '{p}' appears more than once", entry=index)
                paths.add(p)
            if train == test:
                raise ManifestError("train and test paths must differ", entry=index)

            expected = {}
            for key in EXPECTED_FIELDS:
                if key in raw:
                    value = raw[key]
                    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                        raise ManifestError(f"'{key}' must be a positive integer",
                                            entry=index, dataset=name)
                    expected[key] = value
            entries.append(ManifestEntry(name, train, test, **expected))

        return DatasetManifest(tuple(entries), path)


def parse_manifest(manifest_file: str) -> DatasetManifest:
    return ManifestParser().parse_manifest(manifest_file)
