"""Tests for model config loading, validation and run-config resolution"""

import json
import shutil
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import pytest
import yaml

from plrmc.config.loader import (
    ModelConfigLoader,
    RunConfig,
    load_config_file,
    parse_fraction,
    resolve_run_config,
    validate_config,
)
from plrmc.exceptions import ConfigError
from plrmc.models.registry import MODELS, build_model, get_model
from plrmc.models.sequence import IsgSequence


SHIPPED_CONFIGS = Path(__file__).resolve().parent.parent / "configs"


class TestModelConfigLoader:

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.loader = ModelConfigLoader(self.temp_dir)

    def teardown_method(self):
        shutil.rmtree(self.temp_dir)

    def test_load_configs_empty_dir(self):
        configs = self.loader.load_configs()

        # Should create and load the default config
        assert len(configs) == 1
        assert "default" in configs
        assert configs["default"]["model"] == "translation"
        assert configs["default"]["n"] == 20

    def test_default_config_is_valid(self):
        configs = self.loader.load_configs()
        assert self.loader.validate_config(configs["default"]) == []

    def test_load_yaml_and_json(self):
        Path(self.temp_dir, "hh.yaml").write_text(
            yaml.dump({"model": "hh", "boundary": "zigzag_I", "width": 48, "height": 6})
        )
        Path(self.temp_dir, "chain.json").write_text(json.dumps({"model": "translation", "n": 12}))

        configs = self.loader.load_configs()

        assert set(configs) == {"hh", "chain"}
        assert configs["hh"]["boundary"] == "zigzag_I"
        assert configs["chain"]["n"] == 12

    def test_broken_file_is_skipped(self):
        Path(self.temp_dir, "good.yaml").write_text(yaml.dump({"model": "translation"}))
        Path(self.temp_dir, "bad.yaml").write_text("model: [unclosed\n")

        configs = self.loader.load_configs()

        assert "good" in configs
        assert "bad" not in configs

    def test_get_config_by_name(self):
        Path(self.temp_dir, "custom.yaml").write_text(yaml.dump({"model": "majorana-shift", "n": 24}))
        self.loader.load_configs()

        config = self.loader.get_config("custom")
        assert config["model"] == "majorana-shift"

    def test_get_config_unknown_name(self):
        self.loader.load_configs()
        with pytest.raises(ConfigError):
            self.loader.get_config("missing")

    def test_reload_if_changed(self):
        self.loader.load_configs()
        initial_time = self.loader.last_loaded

        changed = self.loader.reload_if_changed()
        assert changed is False
        assert self.loader.last_loaded == initial_time

        time.sleep(0.1)  # Ensure different timestamp
        Path(self.temp_dir, "new.yaml").write_text(yaml.dump({"model": "translation", "n": 8}))

        changed = self.loader.reload_if_changed()
        assert changed is True
        assert self.loader.last_loaded > initial_time
        assert "new" in self.loader.configs


class TestValidateConfig:

    def test_valid_configs(self):
        assert validate_config({"model": "wpt", "boundary": "right_R", "width": 24, "height": 24}) == []
        assert validate_config({"model": "translation", "n": 20, "cuts": [[12, 7], ["13", "8"]]}) == []
        assert validate_config({"model": "teleport-chain", "n": 4, "radius": "3/2"}) == []
        assert validate_config({"model": "random-1d", "seed": 2 ** 63, "margin_override": 3}) == []

    def test_unknown_field(self):
        errors = validate_config({"model": "translation", "colour": "blue"})
        assert errors == ["unknown field 'colour'"]

    def test_unknown_model(self):
        errors = validate_config({"model": "toric"})
        assert len(errors) == 1
        assert "model must be one of" in errors[0]

    def test_missing_model(self):
        assert any("model must be one of" in e for e in validate_config({"n": 12}))

    def test_bad_boundary(self):
        errors = validate_config({"model": "hh", "boundary": "right_R"})
        assert len(errors) == 1
        assert "zigzag_I" in errors[0]

    def test_boundary_on_model_without_boundaries(self):
        errors = validate_config({"model": "translation", "boundary": "right_R"})
        assert errors == ["model translation takes no boundary"]

    def test_sizes_must_be_positive_integers(self):
        errors = validate_config({"model": "wpt", "width": 0, "height": 2.5})
        assert "width must be a positive integer" in errors
        assert "height must be a positive integer" in errors

    def test_unused_size_rejected(self):
        assert validate_config({"model": "wpt", "n": 12}) == ["model wpt does not use n"]
        assert validate_config({"model": "translation", "width": 12}) == ["model translation does not use width"]

    def test_fraction_fields(self):
        errors = validate_config({"model": "translation", "radius": "abc", "margin_override": "1/3"})
        assert "radius must be a number or a fraction such as '3/2'" in errors
        assert "margin_override must be a positive multiple of 1/2" in errors

    def test_seed_range(self):
        assert validate_config({"model": "random-1d", "seed": -1})
        assert validate_config({"model": "random-1d", "seed": 2 ** 64})
        assert validate_config({"model": "random-1d", "seed": True})

    def test_cuts_shape_and_order(self):
        errors = validate_config({"model": "translation", "cuts": [[7, 12], [1, 2, 3], 5]})
        assert "cuts[0] needs a > b" in errors
        assert "cuts[1] must be a pair [a, b] of numbers" in errors
        assert "cuts[2] must be a pair [a, b] of numbers" in errors

    def test_parse_fraction(self):
        assert parse_fraction("-1/2") == Fraction(-1, 2)
        assert parse_fraction(0.5) == Fraction(1, 2)
        assert parse_fraction(3) == 3
        with pytest.raises(ValueError):
            parse_fraction(None)


class TestRunConfig:

    def test_defaults_fill_in(self):
        rc = resolve_run_config("verify", None, {"model": "hh"})
        assert rc.model == "hh"
        assert rc.boundary == "zigzag_I"
        assert (rc.width, rc.height) == (48, 6)
        assert rc.source == "flags"

    def test_no_model_means_translation(self):
        rc = resolve_run_config("verify")
        assert rc.model == "translation"
        assert rc.n == 20

    def test_flags_override_file(self):
        file_config = {"model": "translation", "n": 20, "cuts": [[12, 7]]}
        rc = resolve_run_config("index", file_config, {"n": 16, "seed": None}, source="x.yaml")
        assert rc.n == 16
        assert rc.cuts == [(Fraction(12), Fraction(7))]
        assert rc.source == "x.yaml"

    def test_invalid_merge_raises_with_errors(self):
        with pytest.raises(ConfigError) as info:
            resolve_run_config("verify", {"model": "wpt", "boundary": "nowhere", "extra": 1})
        assert len(info.value.errors) == 2

    def test_to_json_is_plain(self):
        rc = resolve_run_config(
            "index", {"model": "majorana-shift", "cuts": [["29/2", 9]]}, {"margin_override": "5/2"},
            output="json",
        )
        data = rc.to_json()
        assert data["cuts"] == [["29/2", "9"]]
        assert data["margin_override"] == "5/2"
        assert data["output"] == "json"
        json.dumps(data)

    def test_decompose_config_has_no_model(self):
        rc = RunConfig(command="decompose", input_file="chain.yaml")
        assert rc.to_json()["model"] is None
        assert rc.to_json()["input_file"] == "chain.yaml"


class TestLoadConfigFile:

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        shutil.rmtree(self.temp_dir)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config_file(str(Path(self.temp_dir) / "nope.yaml"))

    def test_not_a_mapping(self):
        path = Path(self.temp_dir) / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_config_file(str(path))


class TestRegistry:

    def test_every_model_has_defaults(self):
        for name, info in MODELS.items():
            assert info.name == name
            assert info.uses_window or info.uses_sites

    def test_unknown_model(self):
        with pytest.raises(ConfigError):
            get_model("surface")

    def test_radius_override(self):
        rc = resolve_run_config("verify", None, {"model": "translation", "n": 8, "radius": "2"})
        seq = build_model(rc)
        assert isinstance(seq, IsgSequence)
        assert seq.radius == 2

    def test_random_model_records_expected_index(self):
        rc = resolve_run_config("index", None, {"model": "random-1d", "seed": 3})
        seq = build_model(rc)
        assert "expected_index" in seq.metadata

    def test_shipped_configs_are_valid(self):
        loader = ModelConfigLoader(str(SHIPPED_CONFIGS))
        configs = loader.load_configs()
        assert "default" in configs
        for name, config in configs.items():
            assert loader.validate_config(config) == [], name
