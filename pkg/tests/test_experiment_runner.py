"""
Tests for algorithm names, single evaluations and manifest benchmarks.
"""
import pytest

from utils.error_logger import ErrorLogger
from utils.errors import ConfigError
from utils.ensemble_analysis import predict_distance_calls
from utils.experiment_runner import (AlgorithmPart, ExperimentRunner, expand_sweep,
                                     mean_record, parse_algorithm, seeds_for)
from utils.manifest_parser import parse_manifest
from utils.prototypes import prototype_count
from utils.results_writer import ResultRecord
from utils.synthetic_data import make_train_test
from utils.ts_parser import write_ts


class TestAlgorithmNames:
    """The "+"-joined algorithm grammar."""

    def test_ensemble_with_kernel_count(self):
        parts, kernel_count = parse_algorithm("rocket+sprocket-msm@16")
        assert parts == (AlgorithmPart("rocket"), AlgorithmPart("sprocket", "msm"))
        assert kernel_count == 16
        assert parts[1].name == "sprocket-msm"

    def test_presets_and_plain_sprocket(self):
        assert parse_algorithm("Sprocket-Top2E")[0] == (AlgorithmPart("sprocket", "top2e"),)
        assert parse_algorithm("sprocket") == ((AlgorithmPart("sprocket"),), None)

    @pytest.mark.parametrize("name", ["sprocket-lcss", "rocket+rocket", "minirocket",
                                      "rocket@0", "rocket@many", ""])
    def test_invalid(self, name):
        with pytest.raises(ConfigError):
            parse_algorithm(name)

    def test_expand_sweep(self):
        assert expand_sweep(["a", "b"], [8, 16]) == ["a@8", "a@16", "b@8", "b@16"]
        assert expand_sweep(["a"], None) == ["a"]

    def test_seeds(self):
        assert seeds_for(5, 3) == [5, 6, 7]
        with pytest.raises(ConfigError):
            seeds_for(0, 0)

    def test_mean_record(self):
        records = [ResultRecord("d", "a", s, acc, 1.0, 2.0, 3.0, 10, 4)
                   for s, acc in enumerate((0.5, 1.0))]
        summary = mean_record(records)
        assert summary["runs"] == 2
        assert summary["accuracy"] == pytest.approx(0.75)
        assert mean_record([]) == {}


class TestEvaluate:
    """One algorithm on one train/test pair."""

    def test_single_part_record(self, univariate_pair, make_config):
        train, test = univariate_pair
        runner = ExperimentRunner(make_config(), emit_correctness=True)
        output = runner.evaluate(train, test, "sprocket-euclidean@8", seed=0)
        record = output.records[0]
        M = prototype_count(train.n, 4)
        assert 0.0 <= record.accuracy <= 1.0
        assert record.feature_count == 8 * M
        assert record.distance_calls == predict_distance_calls(8, train.n, 4, 1)
        assert len(output.correctness) == test.n
        assert {row["correct"] for row in output.correctness} <= {0, 1}

    def test_ensemble_reuses_cached_parts(self, univariate_pair, make_config):
        train, test = univariate_pair
        runner = ExperimentRunner(make_config())
        single = runner.evaluate(train, test, "sprocket-msm@8", seed=1).records[0]
        calls = runner.counter.total
        ensemble = runner.evaluate(train, test, "rocket+sprocket-msm@8", seed=1).records[0]
        assert runner.counter.total == calls
        assert ensemble.feature_count == single.feature_count + 16
        assert ensemble.distance_calls == single.distance_calls

    def test_rocket_costs_no_distances(self, univariate_pair, make_config):
        train, test = univariate_pair
        output = ExperimentRunner(make_config()).evaluate(train, test, "rocket@8", seed=0)
        assert output.records[0].distance_calls == 0
        assert output.records[0].feature_count == 16
        assert output.costs == []

    def test_cost_rows(self, multichannel_pair, make_config):
        train, test = multichannel_pair
        output = ExperimentRunner(make_config()).evaluate(train, test, "sprocket-top2@8", seed=0)
        row = output.costs[0]
        assert row["observed_calls"] == row["predicted_calls"]
        assert row["predicted_calls"] == predict_distance_calls(8, train.n, 4, 3)
        assert row["predicted_units"] > 0

    def test_same_seed_same_accuracy(self, univariate_pair, make_config):
        train, test = univariate_pair
        first = ExperimentRunner(make_config()).evaluate(train, test, "sprocket@8", seed=3)
        second = ExperimentRunner(make_config(thread_count=2)).evaluate(train, test,
                                                                        "sprocket@8", seed=3)
        assert first.records[0].accuracy == second.records[0].accuracy


@pytest.fixture
def suite(temp_dir):
    """Two valid datasets and one whose manifest metadata is wrong."""
    entries = []
    for index, name in enumerate(("Alpha", "Beta", "Gamma")):
        train, test = make_train_test(n_train=6, n_test=5, length=30, seed=index, name=name)
        write_ts(train, str(temp_dir / name / f"{name}_TRAIN.ts"))
        write_ts(test, str(temp_dir / name / f"{name}_TEST.ts"))
        train_size = 99 if name == "Gamma" else 12
        entries.append(f'[[datasets]]\nname = "{name}"\ntrain = "{name}/{name}_TRAIN.ts"\n'
                       f'test = "{name}/{name}_TEST.ts"\ntrain_size = {train_size}\n')
    entries.append('[[datasets]]\nname = "Absent"\ntrain = "Absent/a.ts"\ntest = "Absent/b.ts"\n')
    path = temp_dir / "suite.toml"
    path.write_text("\n".join(entries))
    return parse_manifest(str(path))


class TestBenchmark:
    """Manifest runs."""

    def test_records_and_logged_failures(self, suite, make_config):
        error_logger = ErrorLogger()
        runner = ExperimentRunner(make_config(), error_logger)
        output = runner.benchmark(suite, ["rocket@8", "sprocket-euclidean@8"], seeds=[0])
        assert len(output.records) == 4
        assert {r.dataset for r in output.records} == {"Alpha", "Beta"}
        failed = {e["context"]["dataset"] for e in error_logger.get_errors("dataset")}
        assert failed == {"Gamma", "Absent"}
        gamma = [e for e in error_logger.get_errors() if e["context"]["dataset"] == "Gamma"][0]
        assert gamma["context"]["code"] == "invalid_dataset"

    def test_skip_missing(self, suite, make_config):
        error_logger = ErrorLogger()
        output = ExperimentRunner(make_config(), error_logger).benchmark(
            suite, ["rocket@8"], seeds=[0, 1], skip_missing=True)
        assert output.skipped == ["Absent"]
        assert len(output.records) == 4
        assert [e["context"]["dataset"] for e in error_logger.get_errors()] == ["Gamma"]

    def test_unknown_algorithm_fails_before_running(self, suite, make_config):
        runner = ExperimentRunner(make_config())
        with pytest.raises(ConfigError):
            runner.benchmark(suite, ["rocket@8", "sprocket-lcss"], seeds=[0])
        assert runner.counter.total == 0
