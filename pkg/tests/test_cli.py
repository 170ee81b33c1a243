"""Tests for the plrmc command-line surface"""

import json
import shutil
import tempfile
from pathlib import Path

import jsonschema
import pytest
import yaml
from click.testing import CliRunner

from plrmc.cli import cli


ROOT = Path(__file__).resolve().parent.parent
SCHEMAS = ROOT / "schemas"
SHIPPED_CONFIGS = ROOT / "configs"


def load_schema(command):
    with open(SCHEMAS / f"{command}.schema.json") as f:
        return json.load(f)


class CliTestCase:

    def setup_method(self):
        self.runner = CliRunner()
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        shutil.rmtree(self.temp_dir)

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args))

    def invoke_json(self, command, *args, exit_code=0):
        result = self.invoke("-o", "json", command, *args)
        assert result.exit_code == exit_code, result.output
        report = json.loads(result.stdout)
        jsonschema.validate(report, load_schema(command))
        assert report["command"] == command
        return report

    def write(self, name, data):
        path = Path(self.temp_dir) / name
        with open(path, "w") as f:
            yaml.dump(data, f)
        return str(path)


class TestVerify(CliTestCase):

    def test_translation_passes(self):
        report = self.invoke_json("verify", "-m", "translation", "-n", "10")
        assert report["verify"]["passed"] is True
        assert report["model"]["period"] == 4
        assert report["config"]["n"] == 10

    def test_teleport_chain_fails_at_radius_one(self):
        report = self.invoke_json("verify", "-m", "teleport-chain", "-n", "4", exit_code=1)
        assert report["verify"]["passed"] is False
        assert any(not t["locally_reversible"] for t in report["verify"]["transitions"])

    def test_text_output(self):
        result = self.invoke("verify", "-m", "translation", "-n", "10")
        assert result.exit_code == 0
        assert "VERIFY" in result.stdout
        assert "Result: PASS" in result.stdout

    def test_config_file(self):
        path = self.write("chain.yaml", {"model": "translation", "n": 12, "name": "twelve"})
        report = self.invoke_json("verify")
        assert report["config"]["source"] == "flags"
        result = self.invoke("-o", "json", "--config", path, "verify")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["config"]["name"] == "twelve"
        assert data["config"]["source"] == path
        assert data["model"]["qubits"] == 12

    def test_flags_override_config_file(self):
        path = self.write("chain.yaml", {"model": "translation", "n": 12})
        result = self.invoke("-o", "json", "--config", path, "verify", "-n", "14")
        assert json.loads(result.stdout)["model"]["qubits"] == 14

    def test_output_is_deterministic(self):
        first = self.invoke("-o", "json", "verify", "-m", "translation", "-n", "10")
        second = self.invoke("-o", "json", "verify", "-m", "translation", "-n", "10")
        assert first.stdout == second.stdout


class TestUsageErrors(CliTestCase):

    def test_unknown_model_choice(self):
        assert self.invoke("verify", "-m", "nope").exit_code == 2

    def test_invalid_boundary(self):
        result = self.invoke("verify", "-m", "wpt", "-b", "diagonal")
        assert result.exit_code == 2
        assert "boundary of wpt" in result.stderr

    def test_missing_config_file(self):
        result = self.invoke("--config", str(Path(self.temp_dir) / "missing.yaml"), "verify")
        assert result.exit_code == 2

    def test_broken_config_file(self):
        path = Path(self.temp_dir) / "broken.yaml"
        path.write_text("model: [unclosed")
        assert self.invoke("--config", str(path), "verify").exit_code == 2

    def test_precondition_failure_exits_one(self):
        result = self.invoke("verify", "-m", "translation", "-n", "7")
        assert result.exit_code == 1
        assert "ERROR" in result.stderr


class TestIndex(CliTestCase):

    def test_translation_index(self):
        report = self.invoke_json("index", "-m", "translation", "-n", "20")
        assert report["index"] == "1"
        assert report["z2"] == 0
        assert report["cut_independent"] is True

    def test_shipped_cuts(self):
        result = self.invoke("-o", "json", "--config", str(SHIPPED_CONFIGS / "translation.yaml"), "index")
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        jsonschema.validate(report, load_schema("index"))
        assert len(report["results"]) == 3
        assert {r["index"] for r in report["results"]} == {"1"}
        assert report["results"][0]["cut_a"] == "12"

    def test_majorana_shift_is_half(self):
        report = self.invoke_json("index", "-m", "majorana-shift", "-n", "24")
        assert report["index"] == "1/2"
        assert report["index_times_two"] == 1
        assert report["z2"] == 1

    def test_margin_override(self):
        report = self.invoke_json("--margin", "3", "index", "-m", "translation", "-n", "20")
        assert report["index"] == "1"
        assert report["results"][0]["margin"] == "3"

    def test_cuts_too_close(self):
        path = self.write("close.yaml", {"model": "translation", "n": 20, "cuts": [[10, "19/2"]]})
        result = self.invoke("--config", path, "index")
        assert result.exit_code == 1
        assert "closer than range + width" in result.stderr

    def test_random_model_reports_expected_index(self):
        report = self.invoke_json("--seed", "3", "index", "-m", "random-1d")
        assert report["config"]["seed"] == 3
        assert str(report["expected_index"]) == report["index"]


class TestDecompose(CliTestCase):

    def decompose(self, data, exit_code=0):
        path = self.write("group.yaml", data)
        report = self.invoke_json("decompose", path, exit_code=exit_code)
        assert report["config"]["input_file"] == path
        return report["decomposition"]

    def test_ising_chain(self):
        gens = [f"Z({j}) Z({j + 1})" for j in range(4)]
        data = self.decompose({"sites": 5, "generators": gens, "name": "ising"})
        assert len(data["chains"]) == 1
        assert len(data["chains"][0]["qubits"]) == 5
        assert data["clifford"] == []

    def test_xx_chain_needs_site_maps(self):
        gens = [f"X({j}) X({j + 1})" for j in range(3)]
        data = self.decompose({"sites": 4, "generators": gens})
        assert len(data["chains"]) == 1
        assert len(data["clifford"]) == 4

    def test_bell_pair(self):
        data = self.decompose({"sites": 2, "generators": ["X(0) X(1)", "Z(0) Z(1)"]})
        assert len(data["bell_pairs"]) == 1
        assert data["chains"] == []

    def test_two_qubits_per_site(self):
        data = self.decompose({
            "sites": 2, "qubits_per_site": 2,
            "generators": ["Z(0) Z(1:1)", "Z(0:1) Z(1)"],
        })
        assert len(data["chains"]) == 2
        assert data["participation"] == [2, 2]

    def test_text_output(self):
        path = self.write("group.yaml", {"sites": 3, "generators": ["Z(0) Z(1)", "Z(1) Z(2)"]})
        result = self.invoke("decompose", path)
        assert result.exit_code == 0
        assert "Ising chains: 1" in result.stdout
        assert "clifford: identity" in result.stdout

    def test_pauli_syntax_error(self):
        path = self.write("group.yaml", {"sites": 2, "generators": ["Q(0)"]})
        assert self.invoke("decompose", path).exit_code == 2

    def test_unknown_site(self):
        path = self.write("group.yaml", {"sites": 2, "generators": ["Z(0) Z(5)"]})
        assert self.invoke("decompose", path).exit_code == 2

    def test_malformed_file(self):
        path = self.write("group.yaml", {"generators": ["Z(0)"]})
        assert self.invoke("decompose", path).exit_code == 2

    def test_non_abelian_input(self):
        path = self.write("group.yaml", {"sites": 2, "generators": ["X(0)", "Z(0)"]})
        assert self.invoke("decompose", path).exit_code == 1

    def test_not_two_site_local(self):
        path = self.write("group.yaml", {"sites": 3, "generators": ["Z(0) Z(2)"]})
        result = self.invoke("decompose", path)
        assert result.exit_code == 1
        assert "only neighbours" in result.stderr


class TestLogicalTrace(CliTestCase):

    def test_translation_trace(self):
        report = self.invoke_json(
            "logical-trace", "-m", "translation", "-n", "10", "--logical", "X(1)", "--cycles", "2"
        )
        steps = report["steps"]
        assert len(steps) == 9
        assert steps[0]["operator"] == report["start"]
        assert steps[0]["cycle"] == 0
        assert steps[-1]["cycle"] == 2

    def test_default_logical(self):
        report = self.invoke_json("logical-trace", "-m", "translation", "-n", "10")
        assert len(report["steps"]) == 5

    def test_logical_index_out_of_range(self):
        result = self.invoke("logical-trace", "-m", "translation", "-n", "10", "--logical-index", "99")
        assert result.exit_code == 1

    def test_bad_logical_text(self):
        result = self.invoke("logical-trace", "-m", "translation", "-n", "10", "--logical", "X[1]")
        assert result.exit_code == 2


class TestListModels(CliTestCase):

    def test_shipped_configs_are_valid(self):
        report = self.invoke_json("list-models", "--config-dir", str(SHIPPED_CONFIGS))
        names = {m["name"] for m in report["models"]}
        assert {"translation", "wpt", "hh", "double-wpt", "majorana-shift"} <= names
        assert report["configs"]
        assert all(c["valid"] for c in report["configs"])

    def test_invalid_config_exits_one(self):
        self.write("bad.yaml", {"model": "wpt", "boundary": "diagonal"})
        report = self.invoke_json("list-models", "--config-dir", self.temp_dir, exit_code=1)
        (entry,) = [c for c in report["configs"] if c["name"] == "bad"]
        assert not entry["valid"]
        assert entry["errors"]

    def test_text_lists_models(self):
        result = self.invoke("list-models", "--config-dir", self.temp_dir)
        assert "translation" in result.stdout
        assert "right_R" in result.stdout


class TestCheckTopological(CliTestCase):

    def test_translation_base_has_local_logicals(self):
        report = self.invoke_json(
            "check-topological", "-m", "translation", "-n", "12", "--ell", "1", exit_code=1
        )
        assert report["topological"] is False
        assert report["condition"] == "local_logical"
        assert report["witness"] == "X(1)"
        assert report["bulk_qubits"] == 12

    def test_window_too_small(self):
        result = self.invoke("check-topological", "-m", "teleport-chain", "-n", "2", "--ell", "3")
        assert result.exit_code == 1
        assert "2ℓ" in result.stderr

    def test_bad_ell(self):
        result = self.invoke("check-topological", "-m", "translation", "--ell", "wide")
        assert result.exit_code == 2


class TestGlue(CliTestCase):

    def test_glue_rejects_other_models(self):
        assert self.invoke("glue", "-m", "translation").exit_code == 2

    @pytest.mark.slow
    def test_double_wpt(self):
        report = self.invoke_json("glue", "-m", "double-wpt", "--width", "6", "--height", "16")
        assert report["verify"]["passed"] is True
        assert report["interface_logicals"] == 0
        assert report["glued_pairs"] == 16
        assert report["open_index"]["index"] == report["strip_index"]["index"]
