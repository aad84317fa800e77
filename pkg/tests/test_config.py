"""Tests for strict config loading and the effective-config echo."""

import json

import pytest

from dualedl.config import ExperimentConfig, config_from_dict, dump_config, load_config


class TestDefaults:
    def test_default_runs_reference_benchmark(self):
        cfg = ExperimentConfig.default()
        assert cfg.data.k == 10
        assert cfg.data.imbalance_ratio == 50.0
        assert cfg.policy.sigma == 3.0
        assert cfg.policy.epsilon == 0.2
        assert cfg.schedule.lambda_max == 0.2
        assert cfg.train.epochs == 100

    def test_empty_mapping_is_default(self):
        assert config_from_dict({}) == ExperimentConfig.default()

    def test_network_spec_derived_from_data(self):
        cfg = ExperimentConfig.default()
        spec = cfg.network_spec()
        assert spec.input_dim == cfg.data.feature_dim
        assert spec.k == cfg.data.k

    def test_with_seed_overrides_both(self):
        cfg = ExperimentConfig.default().with_seed(9)
        assert cfg.data.seed == 9
        assert cfg.train.seed == 9


class TestStrictness:
    def test_unknown_top_level_field(self):
        with pytest.raises(ValueError, match="bogus"):
            config_from_dict({"bogus": 1})

    def test_unknown_section_field(self):
        with pytest.raises(ValueError, match="data.bogus"):
            config_from_dict({"data": {"bogus": 1}})

    def test_invalid_value_names_section(self):
        with pytest.raises(ValueError, match="policy"):
            config_from_dict({"policy": {"epsilon": 2.0}})

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValueError):
            load_config(path)


class TestRoundTrip:
    def test_dump_and_reload(self, tmp_path):
        cfg = ExperimentConfig.default().with_seed(4)
        path = tmp_path / "config.json"
        dump_config(cfg, path)
        assert load_config(path) == cfg

    def test_partial_config_fills_defaults(self, tmp_path):
        path = tmp_path / "partial.json"
        path.write_text(json.dumps({"train": {"epochs": 7}, "output_dir": "x"}))
        cfg = load_config(path)
        assert cfg.train.epochs == 7
        assert cfg.train.batch_size == 64
        assert cfg.data == ExperimentConfig.default().data
