"""CLI（main.py）と設定ファイル・レポート出力のテスト"""

import json
import os

import pytest

from config.loader import dump_run_config, load_run_config, parse_run_config
from config.settings import Config
from main import main
from services.exceptions import ConfigError
from services.report_writer import load_rows

SMALL_GRID = {"dim": 1, "half_width": 1.0, "cells_per_axis": [16, 32, 64]}


def _write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _verify_config():
    return {
        "grid": SMALL_GRID,
        "operator": {"m": 2, "alpha": 1.0},
        "instances": [
            {
                "id": "lemma",
                "theorem": "LemmaPointwise",
                "functions": [{"kind": "random", "seed": 1}, {"kind": "random", "seed": 2}],
                "u": [{"kind": "random", "seed": 3, "low": 0.5, "high": 2.0}, {"kind": "constant", "value": 1.0}],
            },
            {
                "id": "max/power",
                "theorem": "ThmMax",
                "functions": [
                    {"kind": "indicator", "box": {"lower": [-0.5], "upper": [0.5]}},
                    {"kind": "constant", "value": 1.0},
                ],
                "u": [{"kind": "constant", "value": 1.0}, {"kind": "power", "exponent": -0.25}],
                "mode": "A",
            },
        ],
    }


class TestConstantsCommand:

    def test_writes_report(self, tmp_path):
        config = _write_config(tmp_path, {
            "grid": SMALL_GRID,
            "constants": [
                {"label": "root", "weight_class": "A1", "weights": [{"kind": "power", "exponent": -0.5}]},
                {"label": "pair", "weight_class": "Thm23", "exponents": [1.0, 1.0],
                 "weights": [{"kind": "constant", "value": 1.0}, {"kind": "power", "exponent": -0.5}]},
            ],
        })
        out = tmp_path / "out"
        assert main(["constants", "--config", config, "--out", str(out)]) == 0
        report = json.loads((out / "muckenhoupt_report.json").read_text(encoding="utf-8"))
        assert set(report) == {
            "schema_version", "tool", "tool_version", "kind", "config_hash", "grid", "family", "seed", "payload",
        }
        assert report["kind"] == "constants"
        assert [r["label"] for r in report["payload"]] == ["root", "pair"]
        assert len(report["payload"][0]["reports"]) == 3
        assert report["payload"][1]["theorem23"] is not None

    def test_malformed_json(self, tmp_path):
        config = tmp_path / "broken.json"
        config.write_text('{"grid": {', encoding="utf-8")
        assert main(["constants", "--config", str(config), "--out", str(tmp_path / "out")]) == 2

    def test_alpha_out_of_range(self, tmp_path):
        config = _write_config(tmp_path, {"operator": {"m": 1, "alpha": 1.0}})
        assert main(["constants", "--config", config, "--out", str(tmp_path / "out")]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["constants", "--config", str(tmp_path / "missing.json")]) == 2

    def test_negative_seed(self, tmp_path):
        assert main(["constants", "--seed", "-1", "--out", str(tmp_path / "out")]) == 2

    def test_log_file(self, tmp_path):
        main(["constants", "--out", str(tmp_path / "out")])
        assert os.path.exists(os.path.join(Config.LOG_DIR, "lab.log"))


class TestVerifyCommand:

    def test_smoke(self, tmp_path):
        out = tmp_path / "out"
        assert main(["verify", "--config", _write_config(tmp_path, _verify_config()), "--out", str(out)]) == 0
        rows = load_rows(str(out / "summary.csv"))
        assert rows[0] == ["instance_id", "theorem_id", "N", "empirical_constant", "status"]
        assert len(rows) == 1 + 2 * 3
        assert {row[1] for row in rows[1:]} == {"LemmaPointwise", "ThmMax"}
        assert (out / "instances" / "lemma.json").exists()
        assert (out / "instances" / "max_power.json").exists()

    def test_zero_function_is_not_an_error(self, tmp_path):
        data = {
            "grid": SMALL_GRID,
            "operator": {"m": 1, "alpha": 0.5},
            "instances": [{
                "id": "zero",
                "theorem": "ThmMax",
                "functions": [{"kind": "constant", "value": 0.0}],
                "u": [{"kind": "constant", "value": 1.0}],
            }],
        }
        out = tmp_path / "out"
        assert main(["verify", "--config", _write_config(tmp_path, data), "--out", str(out)]) == 0
        result = json.loads((out / "instances" / "zero.json").read_text(encoding="utf-8"))
        assert result["payload"]["status"] == "Degenerate"

    def test_guard(self, tmp_path):
        data = {
            "grid": {"dim": 1, "half_width": 1.0, "cells_per_axis": [512]},
            "operator": {"m": 2, "alpha": 1.0},
            "instances": [{
                "id": "big",
                "theorem": "ThmIMax",
                "functions": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
                "u": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
                "mode": "B",
            }],
        }
        assert main(["verify", "--config", _write_config(tmp_path, data), "--out", str(tmp_path / "out")]) == 3

    def test_reruns_are_byte_identical(self, tmp_path):
        config = _write_config(tmp_path, _verify_config())
        first, second = tmp_path / "first", tmp_path / "second"
        assert main(["verify", "--config", config, "--out", str(first)]) == 0
        assert main(["verify", "--config", config, "--out", str(second)]) == 0
        for relative in ("summary.csv", "instances/lemma.json", "instances/max_power.json"):
            assert (first / relative).read_bytes() == (second / relative).read_bytes()


class TestSearchCommands:

    def _data(self, budget=None):
        sweep = {
            "theorem": "ThmMax",
            "m": 1,
            "alpha": 0.5,
            "parameters": [{"target": "u_exponent", "lower": -0.4, "upper": 0.4, "steps": 3}],
        }
        if budget is not None:
            sweep["budget"] = budget
        return {"grid": SMALL_GRID, "sweep": sweep, "search": {"max_steps": 3, "seed": 5}}

    def test_sweep(self, tmp_path):
        out = tmp_path / "out"
        assert main(["sweep", "--config", _write_config(tmp_path, self._data()), "--out", str(out)]) == 0
        rows = load_rows(str(out / "sweep.csv"))
        assert rows[0][:3] == ["step", "u_exponent[0]", "objective"]
        assert len(rows) == 4
        assert load_rows(str(out / "plot_best.csv"))[0] == ["threshold", "value"]

    def test_sweep_budget(self, tmp_path):
        config = _write_config(tmp_path, self._data(budget=2))
        assert main(["sweep", "--config", config, "--out", str(tmp_path / "out")]) == 4

    def test_sweep_requires_space(self, tmp_path):
        config = _write_config(tmp_path, {"grid": SMALL_GRID})
        assert main(["sweep", "--config", config, "--out", str(tmp_path / "out")]) == 2

    @pytest.mark.parametrize("theorem, m, alpha", [("ThmMax", 1, 1.0), ("ThmMax", 2, 2.5), ("ThmIMax", 1, 0.0)])
    def test_sweep_alpha_out_of_range(self, tmp_path, theorem, m, alpha):
        data = self._data()
        data["sweep"].update({"theorem": theorem, "m": m, "alpha": alpha})
        config = _write_config(tmp_path, data)
        assert main(["sweep", "--config", config, "--out", str(tmp_path / "out")]) == 2
        assert main(["search", "--config", config, "--out", str(tmp_path / "out")]) == 2

    def test_search(self, tmp_path):
        out = tmp_path / "out"
        assert main(["search", "--config", _write_config(tmp_path, self._data()), "--out", str(out)]) == 0
        assert len(load_rows(str(out / "search_history.csv"))) == 1 + 4
        best = json.loads((out / "best.json").read_text(encoding="utf-8"))
        assert best["kind"] == "search"
        assert best["payload"]["seed"] == 5


class TestOracleCommand:

    def _data(self, inject_fault=False):
        return {"oracle": {"seeds": 2, "cases": [[1, 1, 16], [2, 1, 16], [2, 2, 8]], "inject_fault": inject_fault}}

    def test_passes(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["oracle-check", "--config", _write_config(tmp_path, self._data()), "--out", str(out)]) == 0
        assert "[OK]" in capsys.readouterr().out
        report = json.loads((out / "oracle_check.json").read_text(encoding="utf-8"))
        assert all(check["passed"] for check in report["payload"])

    def test_injected_fault_is_caught(self, tmp_path):
        config = _write_config(tmp_path, self._data(inject_fault=True))
        assert main(["oracle-check", "--config", config, "--out", str(tmp_path / "out")]) == 1


class TestConfigLoader:

    def test_round_trip(self, tmp_path):
        config = parse_run_config(json.dumps(_verify_config()))
        assert parse_run_config(dump_run_config(config)) == config

    def test_default(self):
        assert load_run_config(None).grid.cells_per_axis == [64, 128, 256]

    def test_syntax_error_position(self):
        with pytest.raises(ConfigError, match=r"<config>:2:"):
            parse_run_config('{\n  "grid": ,\n}')

    def test_validation_error_path(self):
        with pytest.raises(ConfigError, match=r"grid\.cells_per_axis"):
            parse_run_config(json.dumps({"grid": {"cells_per_axis": [128, 64]}}))

    def test_unknown_stability_key(self):
        with pytest.raises(ConfigError):
            parse_run_config(json.dumps({"stability": {"stable": 1.2}}))

    def test_integral_instance_needs_positive_alpha(self):
        data = {
            "instances": [{
                "id": "imax",
                "theorem": "ThmIMax",
                "alpha": 0.0,
                "functions": [{"kind": "constant", "value": 1.0}],
                "u": [{"kind": "constant", "value": 1.0}],
            }],
        }
        with pytest.raises(ConfigError, match="α > 0"):
            parse_run_config(json.dumps(data))
