"""
Tests for run configuration parsing, validation and TOML round trips.
"""
import os

import pytest
import toml

from utils.errors import ConfigError
from utils.run_config import (DISTANCE_PRESETS, RunConfig, config_from_measure,
                              parse_distance_spec, parse_window_rule, window_for)


class TestWindowRule:
    """Band width from the original series length."""

    @pytest.mark.parametrize("length,expected", [(100, 10), (150, 12), (500, 22), (1, 1), (8, 2)])
    def test_sqrt_rule(self, length, expected):
        assert window_for(length) == expected

    def test_none_and_fixed(self):
        assert window_for(300, "none") is None
        assert window_for(300, "fixed:7") == 7
        assert parse_window_rule("FIXED:0") == ("fixed", 0)

    @pytest.mark.parametrize("rule", ["cube", "fixed:x", "fixed:-2"])
    def test_invalid_rules(self, rule):
        with pytest.raises(ConfigError):
            parse_window_rule(rule)

    def test_length_must_be_positive(self):
        with pytest.raises(ConfigError):
            window_for(0)


class TestDistanceSpec:
    """Kernel shares per measure."""

    def test_explicit_shares(self):
        assert parse_distance_spec("msm:300, euclidean:300") == (("msm", 300), ("euclidean", 300))

    def test_single_measure_takes_all_kernels(self):
        assert parse_distance_spec("twe", 64) == (("twe", 64),)

    def test_presets_sum_to_kernel_count(self):
        for name in DISTANCE_PRESETS:
            for count in (7, 64, 1200):
                spec = parse_distance_spec(name, count)
                assert sum(share for _, share in spec) == count

    def test_top2e_split(self):
        assert parse_distance_spec("top2e", 1200) == (("twe", 300), ("adtw", 300), ("euclidean", 600))

    def test_bare_name_needs_kernel_count(self):
        with pytest.raises(ConfigError):
            parse_distance_spec("msm")

    @pytest.mark.parametrize("text", ["", "msm300", "msm:abc"])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_distance_spec(text, 10)


class TestRunConfig:
    """Validation, overrides and serialization."""

    def test_defaults(self):
        config = RunConfig()
        assert config.kernel_count == 512
        assert config.distance_spec == (("msm", 512),)
        assert config.selection == "uniform_random"
        assert config.prototype_log_base == 4.0
        assert config.window_for_length(150) == 12
        assert config.thread_count >= 1

    @pytest.mark.parametrize("changes", [
        {"kernel_count": 0},
        {"prototype_log_base": 1.0},
        {"window_rule": "bogus"},
        {"kernel_count": 10, "distance_spec": (("msm", 4), ("dtw", 5))},
        {"kernel_count": 10, "distance_spec": (("msm", 10), ("dtw", 0))},
        {"distance_spec": (("lcss", 512),)},
        {"selection": "greedy"},
        {"seed": -1},
        {"thread_count": 0},
        {"channel_mode": "mixed"},
        {"alphas": (0.0, 1.0)},
        {"measure_params": {"msm": {"c": -1.0}}},
    ])
    def test_invalid_values(self, changes):
        with pytest.raises(ConfigError):
            RunConfig(**changes)

    def test_kernel_measures_follow_spec_order(self):
        config = RunConfig(kernel_count=5, distance_spec=(("euclidean", 2), ("msm", 3)))
        assert config.kernel_measures() == ("euclidean", "euclidean", "msm", "msm", "msm")
        assert config.elastic_share == 3

    def test_measure_uses_params_and_window(self):
        config = RunConfig(kernel_count=4, distance_spec="twe",
                           measure_params={"twe": {"lambda": 0.5}}, window_rule="fixed:3")
        measure = config.measure("twe", 100)
        assert measure.params["lmbda"] == 0.5
        assert measure.window == 3

    def test_override_rescales_spec(self):
        config = RunConfig(kernel_count=600, distance_spec=(("msm", 300), ("euclidean", 300)))
        smaller = config.with_overrides(kernel_count=10, seed=None)
        assert smaller.distance_spec == (("msm", 5), ("euclidean", 5))
        assert smaller.seed == config.seed
        assert RunConfig().with_overrides(kernel_count=8).distance_spec == (("msm", 8),)

    def test_config_from_measure(self):
        config = config_from_measure("top4", 8, seed=3)
        assert config.distance_spec == (("twe", 2), ("adtw", 2), ("msm", 2), ("dtw", 2))
        assert config.seed == 3

    def test_toml_round_trip(self, temp_dir):
        config = RunConfig(kernel_count=6, distance_spec=(("msm", 3), ("euclidean", 3)),
                           selection="kmeanspp", seed=2 ** 63 + 5, thread_count=2,
                           measure_params={"msm": {"c": 0.5}})
        path = temp_dir / "run.config.toml"
        text = config.to_toml(str(path))
        assert path.exists()
        data = toml.loads(text)
        assert data["seed"] == str(2 ** 63 + 5)
        assert data["measure_params"]["msm"] == {"c": 0.5}
        assert "resolved_windows" in data
        restored = RunConfig.from_toml(str(path))
        assert restored == config

    def test_from_toml_reads_run_table(self, temp_dir):
        path = temp_dir / "config.toml"
        path.write_text('[run]\nkernel_count = 16\ndistance_spec = "top2"\nseed = 4\n')
        config = RunConfig.from_toml(str(path))
        assert config.kernel_count == 16
        assert config.distance_spec == (("twe", 8), ("adtw", 8))

    def test_sample_config_loads(self):
        root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        config = RunConfig.from_toml(os.path.join(root, "sample_data", "sample_config.toml"))
        assert config.distance_spec == (("msm", 128), ("euclidean", 128))
        assert config.selection == "stratified"
        assert config.measure("msm", 100).params["c"] == 0.5

    def test_unknown_keys_are_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"kernels": 5})

    def test_unreadable_file(self, temp_dir):
        with pytest.raises(ConfigError):
            RunConfig.from_toml(str(temp_dir / "missing.toml"))
