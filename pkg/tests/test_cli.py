"""
Tests for the command-line interface: exit codes, JSON output and written files.
"""
import json
import os
import zipfile

import pandas as pd
import pytest

from cli import EXIT_DATASET_ERROR, EXIT_OK, EXIT_USAGE_ERROR, main
from utils.ensemble_analysis import predict_distance_calls, sign_test
from utils.results_writer import ResultRecord, ResultsWriter, read_results
from utils.synthetic_data import make_train_test
from utils.ts_parser import write_ts

FAST = ["--kernels", "8", "--seed", "0", "--threads", "1"]


@pytest.fixture
def files(temp_dir):
    """A written train/test pair: 12 training and 10 test series of length 30."""
    train, test = make_train_test(n_train=6, n_test=5, length=30, seed=4, name="Toy")
    return {
        "train": write_ts(train, str(temp_dir / "Toy_TRAIN.ts")),
        "test": write_ts(test, str(temp_dir / "Toy_TEST.ts")),
        "n_train": train.n,
        "n_test": test.n,
    }


def _error(captured):
    return json.loads(captured.err.strip().splitlines()[-1])["error"]


class TestEvaluate:
    """The evaluate command."""

    def test_prints_records(self, files, capsys):
        code = main(["evaluate", files["train"], files["test"], "--distance", "euclidean"] + FAST)
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        records = report["records"]
        assert len(records) == 1
        assert 0.0 <= records[0]["accuracy"] <= 1.0
        assert records[0]["distance_calls"] == predict_distance_calls(8, files["n_train"], 4, 1)
        assert report["mean"]["runs"] == 1
        assert report["mean"]["accuracy"] == pytest.approx(records[0]["accuracy"])

    def test_prints_mean_of_repeats_without_output(self, files, capsys):
        code = main(["evaluate", files["train"], files["test"], "--repeats", "3"] + FAST)
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert [r["seed"] for r in report["records"]] == [0, 1, 2]
        assert report["mean"]["runs"] == 3
        expected = sum(r["accuracy"] for r in report["records"]) / 3
        assert report["mean"]["accuracy"] == pytest.approx(expected)

    def test_unsupported_output_extension_fails_before_fitting(self, files, temp_dir, capsys):
        output = temp_dir / "res.txt"
        code = main(["evaluate", files["train"], files["test"], "--output", str(output)] + FAST)
        captured = capsys.readouterr()
        assert code == EXIT_USAGE_ERROR
        error = _error(captured)
        assert error["code"] == "usage_error"
        assert "txt" in error["message"]
        assert captured.out == ""
        assert not output.exists()

    def test_format_flag_accepts_any_extension(self, files, temp_dir, capsys):
        output = str(temp_dir / "res.txt")
        code = main(["evaluate", files["train"], files["test"], "--output", output,
                     "--format", "csv"] + FAST)
        assert code == EXIT_OK
        assert len(read_results(output)) == 1

    def test_unwritable_output_is_a_structured_error(self, files, temp_dir, capsys):
        blocker = temp_dir / "blocker"
        blocker.write_text("a file, not a directory")
        code = main(["evaluate", files["train"], files["test"],
                     "--output", str(blocker / "run.csv")] + FAST)
        assert code == EXIT_DATASET_ERROR
        assert _error(capsys.readouterr())["code"] == "output_error"

    def test_bundle(self, files, temp_dir, capsys):
        output = str(temp_dir / "run.csv")
        bundle = str(temp_dir / "run.zip")
        code = main(["evaluate", files["train"], files["test"], "--output", output,
                     "--emit-correctness", "--bundle", bundle] + FAST)
        assert code == EXIT_OK
        with zipfile.ZipFile(bundle) as archive:
            names = set(archive.namelist())
            readme = archive.read("README.txt").decode()
        assert names == {"run.csv", "run.config.toml", "run.costs.csv",
                         "run.correctness.csv", "README.txt"}
        assert "Result records: 1" in readme

    def test_bundle_needs_output(self, files, capsys):
        code = main(["evaluate", files["train"], files["test"], "--bundle", "x.zip"] + FAST)
        assert code == EXIT_USAGE_ERROR
        assert _error(capsys.readouterr())["code"] == "usage_error"

    def test_repeats_and_sidecars(self, files, temp_dir, capsys):
        output = str(temp_dir / "out" / "run.csv")
        code = main(["evaluate", files["train"], files["test"], "--algorithm", "rocket+sprocket",
                     "--repeats", "3", "--output", output, "--emit-correctness"] + FAST)
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["mean"]["runs"] == 3
        assert [r.seed for r in read_results(output)] == [0, 1, 2]
        assert os.path.isfile(str(temp_dir / "out" / "run.config.toml"))
        assert os.path.isfile(str(temp_dir / "out" / "run.costs.csv"))
        correctness = pd.read_csv(str(temp_dir / "out" / "run.correctness.csv"))
        assert len(correctness) == 3 * files["n_test"]

    def test_zero_kernels_is_a_usage_error(self, files, capsys):
        code = main(["evaluate", files["train"], files["test"], "--kernels", "0"])
        assert code == EXIT_USAGE_ERROR
        assert _error(capsys.readouterr())["code"] == "config_error"

    def test_distance_flags_are_exclusive(self, files, capsys):
        code = main(["evaluate", files["train"], files["test"], "--distance", "msm",
                     "--distance-spec", "top2"] + FAST)
        assert code == EXIT_USAGE_ERROR
        assert _error(capsys.readouterr())["code"] == "usage_error"

    def test_unknown_algorithm(self, files, capsys):
        code = main(["evaluate", files["train"], files["test"], "--algorithm", "lcss"] + FAST)
        assert code == EXIT_USAGE_ERROR

    def test_missing_file_is_a_dataset_error(self, files, temp_dir, capsys):
        code = main(["evaluate", str(temp_dir / "nope.ts"), files["test"]] + FAST)
        assert code == EXIT_DATASET_ERROR
        assert _error(capsys.readouterr())["code"] == "internal_error"

    def test_malformed_file(self, files, temp_dir, capsys):
        bad = temp_dir / "bad.ts"
        bad.write_text("@problemName Bad\n@data\n")
        code = main(["evaluate", str(bad), files["test"]] + FAST)
        assert code == EXIT_DATASET_ERROR
        assert _error(capsys.readouterr())["code"] == "malformed_header"

    def test_argparse_errors_exit_with_usage_status(self, capsys):
        with pytest.raises(SystemExit) as raised:
            main(["evaluate"])
        assert raised.value.code == EXIT_USAGE_ERROR
        assert _error(capsys.readouterr())["code"] == "usage_error"


class TestBenchmark:
    """The benchmark command."""

    def _manifest(self, temp_dir, extra=""):
        entries = []
        for index, name in enumerate(("Alpha", "Beta")):
            train, test = make_train_test(n_train=6, n_test=5, length=30, seed=index, name=name)
            write_ts(train, str(temp_dir / f"{name}_TRAIN.ts"))
            write_ts(test, str(temp_dir / f"{name}_TEST.ts"))
            entries.append(f'[[datasets]]\nname = "{name}"\ntrain = "{name}_TRAIN.ts"\n'
                           f'test = "{name}_TEST.ts"\n')
        path = temp_dir / "suite.toml"
        path.write_text("\n".join(entries) + extra)
        return str(path)

    def test_writes_one_row_per_run(self, temp_dir, capsys):
        output = str(temp_dir / "bench.json")
        code = main(["benchmark", self._manifest(temp_dir), "--algorithms",
                     "rocket,sprocket-euclidean", "--output", output] + FAST)
        assert code == EXIT_OK
        assert len(read_results(output)) == 4

    def test_kernel_sweep(self, temp_dir, capsys):
        output = str(temp_dir / "sweep.csv")
        code = main(["benchmark", self._manifest(temp_dir), "--algorithms", "sprocket-euclidean",
                     "--kernel-sweep", "4,8", "--output", output, "--seed", "0", "--threads", "1"])
        assert code == EXIT_OK
        records = read_results(output)
        assert sorted({r.algorithm for r in records}) == ["sprocket-euclidean@4",
                                                          "sprocket-euclidean@8"]

    def test_failed_dataset_still_writes_results(self, temp_dir, capsys):
        extra = '\n[[datasets]]\nname = "Absent"\ntrain = "a.ts"\ntest = "b.ts"\n'
        output = str(temp_dir / "bench.csv")
        code = main(["benchmark", self._manifest(temp_dir, extra), "--algorithms", "rocket",
                     "--output", output] + FAST)
        assert code == EXIT_DATASET_ERROR
        assert len(read_results(output)) == 2
        assert _error(capsys.readouterr())["context"]["dataset"] == "Absent"

    def test_skip_missing(self, temp_dir, capsys):
        extra = '\n[[datasets]]\nname = "Absent"\ntrain = "a.ts"\ntest = "b.ts"\n'
        code = main(["benchmark", self._manifest(temp_dir, extra), "--algorithms", "rocket",
                     "--skip-missing"] + FAST)
        assert code == EXIT_OK
        assert len(json.loads(capsys.readouterr().out)) == 2

    def test_bad_sweep(self, temp_dir, capsys):
        with pytest.raises(SystemExit) as raised:
            main(["benchmark", self._manifest(temp_dir), "--kernel-sweep", "4,x"])
        assert raised.value.code == EXIT_USAGE_ERROR


@pytest.fixture
def results_file(temp_dir):
    """Three algorithms on two datasets, with a correctness sidecar."""
    accuracies = {"a": 0.9, "b": 0.8, "c": 0.7}
    records, rows = [], []
    for dataset in ("d1", "d2"):
        for algorithm, value in accuracies.items():
            records.append(ResultRecord(dataset, algorithm, 0, value, 1.0, 0.5, 0.1, 100, 16))
            for instance in range(10):
                rows.append({"dataset": dataset, "algorithm": algorithm, "seed": 0,
                             "instance": instance, "correct": int(instance < value * 10)})
    writer = ResultsWriter()
    path = writer.write_results(records, str(temp_dir / "run.csv"))
    writer.write_correctness(rows, str(temp_dir / "run.correctness.csv"))
    return path


class TestAnalyze:
    """The analyze command."""

    def test_reports_and_files(self, results_file, temp_dir, capsys):
        code = main(["analyze", results_file, "--pair", "a,b", "--output-dir",
                     str(temp_dir / "report")])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["ranks"]["a"] == {"mean_rank": 1.0, "best_count": 2}
        assert report["ranks"]["c"]["mean_rank"] == 3.0
        assert report["pairs"][0]["wins"] == 2
        assert report["pairs"][0]["p_value"] == pytest.approx(sign_test(2, 0))
        assert "friedman" in report
        names = {os.path.basename(p) for p in report["files"]}
        assert {"run.accuracy.csv", "run.ranks.csv", "run.timing.csv",
                "run.pairwise_accuracy.csv", "run.grid.concatenated.q_statistic.csv",
                "run.grid.per_dataset.double_fault.csv"} <= names
        for path in report["files"]:
            assert os.path.isfile(path)

    def test_single_algorithm(self, temp_dir, capsys):
        path = ResultsWriter().write_results(
            [ResultRecord("d1", "only", 0, 0.5, 1.0, 1.0, 1.0, 0, 8)], str(temp_dir / "one.json"))
        code = main(["analyze", path])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["ranks"]["only"]["mean_rank"] == 1.0
        assert "notice" in report

    def test_missing_correctness_sidecar(self, results_file, temp_dir, capsys):
        os.remove(str(temp_dir / "run.correctness.csv"))
        assert main(["analyze", results_file]) == EXIT_OK
        assert "grids skipped" in json.loads(capsys.readouterr().out)["notice"]

    def test_unknown_pair(self, results_file, capsys):
        assert main(["analyze", results_file, "--pair", "a,zzz"]) == EXIT_DATASET_ERROR
        assert _error(capsys.readouterr())["code"] == "missing_columns"

    def test_malformed_pair(self, results_file, capsys):
        assert main(["analyze", results_file, "--pair", "a"]) == EXIT_USAGE_ERROR

    def test_empty_results(self, temp_dir, capsys):
        path = ResultsWriter().write_results([], str(temp_dir / "empty.csv"))
        assert main(["analyze", path]) == EXIT_DATASET_ERROR
        assert _error(capsys.readouterr())["code"] == "empty_table"


class TestFitTransform:
    """Saving a transform and applying it later."""

    def test_fit_then_transform(self, files, temp_dir, capsys):
        model = str(temp_dir / "model.npz")
        features = str(temp_dir / "train_features.csv")
        code = main(["fit", files["train"], "--model-out", model, "--features-out", features,
                     "--distance", "twe"] + FAST)
        assert code == EXIT_OK
        fitted = json.loads(capsys.readouterr().out)
        assert fitted["rows"] == files["n_train"]
        assert fitted["distance_calls"] == predict_distance_calls(8, files["n_train"], 4, 1)

        output = str(temp_dir / "test_features.csv")
        assert main(["transform", model, files["test"], "--output", output]) == EXIT_OK
        applied = json.loads(capsys.readouterr().out)
        assert applied["features"] == fitted["features"]
        frame = pd.read_csv(output)
        assert frame.shape == (files["n_test"], fitted["features"])
        assert pd.read_csv(features).shape == (files["n_train"], fitted["features"])

    def test_transform_rejects_other_files(self, files, temp_dir, capsys):
        not_a_model = temp_dir / "model.npz"
        not_a_model.write_bytes(b"nope")
        code = main(["transform", str(not_a_model), files["test"], "--output",
                     str(temp_dir / "x.csv")])
        assert code == EXIT_DATASET_ERROR
        assert _error(capsys.readouterr())["code"] == "model_format_error"
