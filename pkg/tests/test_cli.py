from __future__ import annotations

import json

import pytest

from helpers import oracle_behaviours
from stpt import cli, therac_suite
from stpt.suts import OP_CURSOR_UP, OP_SELECT_ELECTRON, OP_SELECT_PHOTON

PAPER_FORMULA = (
    'IMPLIES(AND(TimeInterval(300,605),Owner("AreaOfInterest")),'
    "OccupyBox(1051,3056,1505,3603))"
)


def run_json_campaign(tmp_path, args, name="report.json"):
    out = tmp_path / name
    code = cli.main(args + ["--report", "json", "--out", str(out)])
    return code, json.loads(out.read_text())


class TestExitCodes:
    def test_clean_robot_campaign_exits_zero(self):
        code = cli.main(
            ["--suite", "robot", "--fault", "none", "--seed", "42", "--num-tests", "50"]
        )
        assert code == 0

    def test_faulty_therac_campaign_exits_one_with_tiny_witness(self, tmp_path):
        code, report = run_json_campaign(
            tmp_path,
            [
                "--suite", "therac25",
                "--fault", "sequenceBug",
                "--seed", "7",
                "--num-tests", "500",
                "--max-len", "12",
            ],
        )
        assert code == 1
        assert report["testsFailed"] >= 1
        witness = report["failures"][0]["shrunkCommands"]
        assert [c["op"] for c in witness] == [
            OP_SELECT_PHOTON,
            OP_CURSOR_UP,
            OP_SELECT_ELECTRON,
        ]

    def test_zero_tests_is_a_configuration_error(self, capsys):
        assert cli.main(["--suite", "robot", "--num-tests", "0"]) == 2
        assert "error:" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "argv",
        [
            ["--suite", "robot", "--fault", "sequenceBug"],
            ["--suite", "therac25", "--fault", "wrongMove"],
            ["--suite", "starship"],
            ["--suite", "robot", "--max-len", "0"],
            ["--suite", "robot", "--workers", "0"],
            ["--suite", "robot", "--timeout-ms", "0"],
            ["--suite", "robot", "--dump-behaviours", "--depth", "-1"],
            ["--suite", "therac25", "--weights", "CursorUp"],
            ["--suite", "therac25", "--weights", "CursorUp=0"],
            ["--suite", "therac25", "--weights", "CursorUp=two"],
            ["--suite", "therac25", "--weights", "flyToMoon=3"],
            ["--suite", "therac25", "--weights", ","],
            [],
        ],
    )
    def test_configuration_errors_exit_two(self, argv, capsys):
        assert cli.main(argv) == 2
        capsys.readouterr()  # swallow diagnostics


class TestSeedHandling:
    def test_env_seed_is_the_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STPT_SEED", "99")
        code, report = run_json_campaign(
            tmp_path, ["--suite", "robot", "--num-tests", "2"]
        )
        assert code == 0
        assert report["seed"] == 99

    def test_flag_overrides_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STPT_SEED", "99")
        _, report = run_json_campaign(
            tmp_path, ["--suite", "robot", "--num-tests", "2", "--seed", "5"]
        )
        assert report["seed"] == 5

    def test_missing_everything_defaults_to_zero(self, tmp_path, monkeypatch):
        monkeypatch.delenv("STPT_SEED", raising=False)
        _, report = run_json_campaign(
            tmp_path, ["--suite", "robot", "--num-tests", "2"]
        )
        assert report["seed"] == 0

    def test_garbage_env_seed_is_an_error(self, monkeypatch, capsys):
        monkeypatch.setenv("STPT_SEED", "lots")
        assert cli.main(["--suite", "robot", "--num-tests", "2"]) == 2
        assert "STPT_SEED" in capsys.readouterr().err


class TestJsonReport:
    def campaign(self, tmp_path, name="report.json"):
        return run_json_campaign(
            tmp_path,
            [
                "--suite", "therac25",
                "--fault", "sequenceBug",
                "--seed", "11",
                "--num-tests", "60",
            ],
            name,
        )

    def test_schema_shape(self, tmp_path):
        _, report = self.campaign(tmp_path)
        assert list(report) == [
            "schemaVersion",
            "seed",
            "config",
            "testsRun",
            "testsFailed",
            "failures",
            "durationMs",
        ]
        assert report["schemaVersion"] == 1
        assert list(report["config"]) == [
            "suite",
            "fault",
            "numTests",
            "maxLen",
            "timeoutMs",
            "weights",
            "workers",
        ]
        assert report["durationMs"] is None
        assert report["testsFailed"] == len(report["failures"])
        for failure in report["failures"]:
            assert list(failure) == [
                "testIndex",
                "kind",
                "classification",
                "originalLength",
                "shrunkCommands",
                "failIndex",
            ]
            assert failure["originalLength"] >= len(failure["shrunkCommands"])

    def test_weights_echo_is_sorted(self, tmp_path):
        _, report = self.campaign(tmp_path)
        weights = report["config"]["weights"]
        assert list(weights) == sorted(weights)

    def test_byte_identical_across_runs(self, tmp_path):
        args = [
            "--suite", "therac25",
            "--fault", "sequenceBug",
            "--seed", "11",
            "--num-tests", "60",
            "--report", "json",
        ]
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        assert cli.main(args + ["--out", str(first)]) == 1
        assert cli.main(args + ["--out", str(second)]) == 1
        assert first.read_bytes() == second.read_bytes()

    def test_worker_count_does_not_change_the_bytes(self, tmp_path):
        args = [
            "--suite", "therac25",
            "--fault", "sequenceBug",
            "--seed", "4",
            "--num-tests", "30",
            "--report", "json",
        ]
        serial = tmp_path / "serial.json"
        parallel = tmp_path / "parallel.json"
        cli.main(args + ["--workers", "1", "--out", str(serial)])
        cli.main(args + ["--workers", "4", "--out", str(parallel)])
        a = json.loads(serial.read_text())
        b = json.loads(parallel.read_text())
        # only the echoed flag may differ; results must not
        assert a["config"].pop("workers") == 1
        assert b["config"].pop("workers") == 4
        assert a == b

    def test_out_file_leaves_stdout_quiet(self, tmp_path, capsys):
        self.campaign(tmp_path)
        assert capsys.readouterr().out == ""


class TestTextReport:
    def test_mirrors_the_table_columns(self, capsys):
        code = cli.main(
            [
                "--suite", "robot",
                "--fault", "wrongMove",
                "--seed", "3",
                "--num-tests", "4",
            ]
        )
        out = capsys.readouterr().out
        assert code == 1
        header, *_ = [line for line in out.splitlines() if "API code" in line]
        assert "expected (spec)" in header
        assert "result" in header and "error" in header
        assert "SutMismatch" in out
        assert 'position="M"' in out

    def test_clean_run_summary(self, capsys):
        code = cli.main(
            ["--suite", "robot", "--seed", "1", "--num-tests", "3"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "failed: 0" in out


class TestReplay:
    def test_reproduces_recorded_failures(self, tmp_path, capsys):
        _, report = run_json_campaign(
            tmp_path,
            [
                "--suite", "therac25",
                "--fault", "sequenceBug",
                "--seed", "7",
                "--num-tests", "200",
            ],
        )
        count = len(report["failures"])
        assert count >= 1
        code = cli.main(["--replay", str(tmp_path / "report.json")])
        out = capsys.readouterr().out
        assert code == 1
        assert f"reproduced {count} of {count} failures" in out
        assert "reproduced (SutMismatch)" in out

    def test_clean_report_replays_clean(self, tmp_path, capsys):
        run_json_campaign(
            tmp_path, ["--suite", "robot", "--seed", "1", "--num-tests", "5"]
        )
        code = cli.main(["--replay", str(tmp_path / "report.json")])
        out = capsys.readouterr().out
        assert code == 0
        assert "reproduced 0 of 0 failures" in out

    def test_fixed_sut_no_longer_reproduces(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        run_json_campaign(
            tmp_path,
            [
                "--suite", "therac25",
                "--fault", "sequenceBug",
                "--seed", "7",
                "--num-tests", "200",
            ],
        )
        doc = json.loads(path.read_text())
        doc["config"]["fault"] = "none"  # pretend the defect was repaired
        path.write_text(json.dumps(doc))
        code = cli.main(["--replay", str(path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "did not reproduce" in out

    def test_missing_report_is_an_error(self, tmp_path, capsys):
        assert cli.main(["--replay", str(tmp_path / "nope.json")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_wrong_schema_rejected(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"schemaVersion": 99, "failures": []}))
        assert cli.main(["--replay", str(path)]) == 2
        capsys.readouterr()


class TestTraceCheck:
    def write_inputs(self, tmp_path, formula_lines, trace):
        inv = tmp_path / "inv.txt"
        inv.write_text("\n".join(formula_lines) + "\n")
        tr = tmp_path / "trace.json"
        tr.write_text(json.dumps(trace))
        return [
            "--suite", "trace-check",
            "--invariants", str(inv),
            "--trace", str(tr),
        ]

    OCCUPIED = {
        "time": 400,
        "owner": "AreaOfInterest",
        "boxes": [[1051, 3056, 1505, 3603]],
    }
    EMPTY = {"time": 400, "owner": "AreaOfInterest", "boxes": []}

    def test_holding_trace_exits_zero(self, tmp_path, capsys):
        argv = self.write_inputs(tmp_path, [PAPER_FORMULA], [self.OCCUPIED])
        assert cli.main(argv) == 0
        assert "line 1: holds" in capsys.readouterr().out

    def test_violation_reports_observation_index(self, tmp_path, capsys):
        argv = self.write_inputs(tmp_path, [PAPER_FORMULA], [self.EMPTY])
        assert cli.main(argv) == 1
        assert "line 1: violated at observation 0" in capsys.readouterr().out

    def test_comments_and_blanks_keep_line_numbers(self, tmp_path, capsys):
        argv = self.write_inputs(
            tmp_path, ["# heading", "", PAPER_FORMULA], [self.EMPTY]
        )
        assert cli.main(argv) == 1
        assert "line 3: violated" in capsys.readouterr().out

    def test_malformed_formula_exits_two(self, tmp_path, capsys):
        argv = self.write_inputs(tmp_path, ["OWNER("], [self.OCCUPIED])
        assert cli.main(argv) == 2
        assert "inv.txt:1:" in capsys.readouterr().err

    def test_unsorted_trace_exits_two(self, tmp_path, capsys):
        argv = self.write_inputs(
            tmp_path,
            [PAPER_FORMULA],
            [self.OCCUPIED, {**self.OCCUPIED, "time": 300}],
        )
        assert cli.main(argv) == 2
        capsys.readouterr()

    def test_empty_formula_file_exits_two(self, tmp_path, capsys):
        argv = self.write_inputs(tmp_path, ["# nothing here"], [self.OCCUPIED])
        assert cli.main(argv) == 2
        capsys.readouterr()

    def test_missing_flags_exit_two(self, capsys):
        assert cli.main(["--suite", "trace-check"]) == 2
        capsys.readouterr()


class TestDumpBehaviours:
    def dump(self, capsys, *argv):
        code = cli.main(["--dump-behaviours", *argv])
        return code, capsys.readouterr().out

    def test_therac_depth_zero_is_the_single_init_record(self, capsys):
        code, out = self.dump(capsys, "--suite", "therac25", "--depth", "0")
        assert code == 0
        assert out.startswith("# behaviours: 1\n")
        assert 'beam="Off"' in out and 'mode="NoMode"' in out

    def test_therac_depth_three_count_matches_oracle(self, capsys):
        expected = len(oracle_behaviours(therac_suite().model, 3))
        code, out = self.dump(capsys, "--suite", "therac25", "--depth", "3")
        assert code == 0
        assert out.startswith(f"# behaviours: {expected}\n")

    def test_robot_depth_one_counts_enabled_actions_plus_prefix(self, capsys):
        # from "Y": initialisePosition, moveToQ, moveToR, moveToS (+ the empty prefix)
        code, out = self.dump(capsys, "--suite", "robot", "--depth", "1")
        assert code == 0
        assert out.startswith("# behaviours: 5\n")
        assert "moveToY" not in out

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "behaviours.txt"
        code = cli.main(
            [
                "--dump-behaviours",
                "--suite", "therac25",
                "--depth", "1",
                "--out", str(target),
            ]
        )
        assert code == 0
        assert capsys.readouterr().out == ""
        assert target.read_text().startswith("# behaviours: 5\n")


class TestRobotConfigFlag:
    def write_config(self, tmp_path, doc):
        path = tmp_path / "deploy.json"
        path.write_text(json.dumps(doc))
        return str(path)

    def test_campaign_uses_the_catalogue(self, tmp_path, capsys):
        path = self.write_config(
            tmp_path,
            {
                "waypoints": {
                    "Y": {"at": [5, 5], "footprint": [4, 4, 6, 6]},
                    "Z": {"at": [9, 9], "footprint": [8, 8, 10, 10]},
                },
            },
        )
        code = cli.main(
            [
                "--suite", "robot",
                "--robot-config", path,
                "--dump-behaviours",
                "--depth", "1",
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "moveToZ" in out
        assert "moveToQ" not in out

    def test_bad_catalogue_is_a_configuration_error(self, tmp_path, capsys):
        path = self.write_config(
            tmp_path,
            {"waypoints": {"Q": {"at": [1, 1], "footprint": [0, 0, 2, 2]}}},
        )
        assert cli.main(["--suite", "robot", "--robot-config", path]) == 2
        capsys.readouterr()

    def test_unreadable_file_is_a_configuration_error(self, tmp_path, capsys):
        missing = str(tmp_path / "absent.json")
        assert cli.main(["--suite", "robot", "--robot-config", missing]) == 2
        capsys.readouterr()
