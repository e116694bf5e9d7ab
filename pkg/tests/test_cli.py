"""End-to-end checks of the command line driver.

Everything runs in-process through ``horolab.cli.run`` so exit codes and
output bytes are observable without spawning subprocesses.
"""

import json
import math

import pytest

from horolab.cli import run


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def rows_of(text):
    lines = text.strip().split("\n")
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestAnchors:
    def test_delta_example_brackets_constant(self, capsys):
        code, out = invoke(capsys, "delta", "--k", "1", "--m", "3", "--xi", "0,0", "--y", "0.25")
        assert code == 0
        header, rows = rows_of(out)
        assert header == ["y", "value", "tail", "Qmax", "Dmax"]
        (row,) = rows
        value, tail = float(row[1]), float(row[2])
        assert value == pytest.approx(4.100019272632206, rel=1e-12)
        assert tail == pytest.approx(36.64100505713753, rel=1e-12)
        # the y -> 0 limit for the zero torus point sits inside the bracket
        assert value < 16.42 < value + tail

    def test_quadsum_example(self, capsys):
        code, out = invoke(capsys, "quadsum", "--q", "2", "--N", "1", "--v", "0,0,0,0")
        assert code == 0
        header, rows = rows_of(out)
        assert header == ["q", "value_re", "value_im", "bound", "ratio"]
        assert float(rows[0][1]) == pytest.approx(-4.0, abs=1e-9)
        assert float(rows[0][2]) == pytest.approx(0.0, abs=1e-9)

    def test_kloosterman_within_bound(self, capsys):
        code, out = invoke(capsys, "kloosterman", "--m", "1", "--n", "2", "--q", "3,5,7,11,13")
        assert code == 0
        _, rows = rows_of(out)
        assert len(rows) == 5
        for row in rows:
            assert abs(float(row[1])) <= float(row[2]) + 1e-9
            assert float(row[3]) <= 1.0 + 1e-9

    def test_lfd_default_finds_no_witness(self, capsys):
        code, out = invoke(capsys, "lfd")
        assert code == 0
        header, rows = rows_of(out)
        assert header == ["ok", "d", "q"]
        assert rows[0][0] == "1"

    def test_lfd_witness_for_rational_direction(self, capsys):
        code, out = invoke(capsys, "lfd", "--psi", "0.5", "--c", "0.5", "--kappa", "2")
        assert code == 0
        _, rows = rows_of(out)
        assert rows[0][0] == "0"
        assert int(rows[0][1]) >= 1


class TestTables:
    def test_headers_match_documented_schemas(self, capsys):
        cheap = {
            "sgq": ["T", "value", "witness1", "witness2"],
            "expsum": ["X", "lhs_re", "lhs_im", "rhs", "ratio"],
            "orbit": ["T", "avg_re", "avg_im", "limit", "error"],
            "horocycle": ["y", "average", "limit", "error"],
            "theorem4": ["T", "term0", "series", "tail"],
        }
        args = {"horocycle": ("--y", "0.3"), "theorem4": ("--T", "50")}
        for command, expected in cheap.items():
            code, out = invoke(capsys, command, *args.get(command, ()))
            assert code == 0, command
            header, rows = rows_of(out)
            assert header == expected
            assert rows

    def test_schedule_spans_rows_in_order(self, capsys):
        code, out = invoke(capsys, "theorem4", "--T", "300,100,200")
        assert code == 0
        _, rows = rows_of(out)
        assert [float(r[0]) for r in rows] == [300.0, 100.0, 200.0]

    def test_floats_carry_seventeen_significant_digits(self, capsys):
        _, out = invoke(capsys, "delta", "--y", "0.37")
        _, rows = rows_of(out)
        cell = rows[0][1]
        assert len(cell.replace(".", "").replace("-", "").lstrip("0")) >= 16
        assert float(cell) == float(format(float(cell), ".17g"))

    def test_out_flag_writes_the_same_bytes(self, tmp_path, capsys):
        target = tmp_path / "table.csv"
        code, out = invoke(capsys, "expsum", "--X", "4,6")
        code2, silent = invoke(capsys, "expsum", "--X", "4,6", "--out", str(target))
        assert code == code2 == 0
        assert silent == ""
        assert target.read_text() == out

    def test_json_document_shape(self, capsys):
        code, out = invoke(capsys, "delta", "--format", "json", "--y", "0.5,0.25", "--seed", "7")
        assert code == 0
        doc = json.loads(out)
        assert set(doc) == {"metadata", "rows"}
        meta = doc["metadata"]
        assert meta["command"] == "delta"
        assert meta["seed"] == 7
        assert meta["version"]
        assert meta["params"]["y"] == [0.5, 0.25]
        assert [r["y"] for r in doc["rows"]] == [0.5, 0.25]
        assert set(doc["rows"][0]) == {"y", "value", "tail", "Qmax", "Dmax"}

    def test_reruns_are_byte_identical(self, capsys):
        argv = ("expsum", "--X", "4,8", "--alpha", "0.1,0.2,0.3,0.4", "--format", "json")
        _, first = invoke(capsys, *argv)
        _, second = invoke(capsys, *argv)
        assert first == second


class TestConfigFile:
    def test_flags_override_config_which_overrides_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("y = 0.125\nm = 4  # heavier decay\n")
        _, from_cfg = invoke(capsys, "delta", "--config", str(cfg))
        assert float(rows_of(from_cfg)[1][0][0]) == 0.125
        _, overridden = invoke(capsys, "delta", "--config", str(cfg), "--y", "0.5")
        assert float(rows_of(overridden)[1][0][0]) == 0.5
        # m = 4 from the file still applies alongside the overriding flag
        _, plain = invoke(capsys, "delta", "--y", "0.5")
        assert overridden != plain

    def test_unknown_config_key_is_a_validation_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("zz = 1\n")
        code, _ = invoke(capsys, "delta", "--config", str(cfg))
        assert code == 2

    def test_missing_config_file(self, capsys):
        code, _ = invoke(capsys, "delta", "--config", "/nonexistent/path.cfg")
        assert code == 2


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        assert run(["delta", "--bogus", "1"]) == 2

    def test_unknown_subcommand(self, capsys):
        assert run(["teleport"]) == 2

    def test_no_arguments_prints_usage(self, capsys):
        assert run([]) == 2

    def test_help_exits_cleanly(self, capsys):
        assert run(["--help"]) == 0
        assert run(["delta", "--help"]) == 0

    def test_domain_error_maps_to_two(self, capsys):
        assert run(["delta", "--y", "-0.5"]) == 2
        assert run(["orbit", "--route", "teleport"]) == 2
        assert run(["delta", "--y", "abc"]) == 2
        assert run(["delta", "--format", "xml"]) == 2
        assert run(["sgq", "--matrix", "1,0,0", "--xi", "0,0"]) == 2

    def test_resource_guard_maps_to_four(self, capsys):
        assert run(["horocycle", "--y", "1e-9"]) == 4

    def test_mismatched_block_counts(self, capsys):
        assert run(["delta", "--k", "2", "--xi", "0,0"]) == 2
        assert run(["orbit", "--freq", "1,0,0,1"]) == 2


class TestSweep:
    def test_sweep_matches_sequential_output(self, capsys):
        argv = ("theorem4", "--T", "100,200,400,800", "--matrix", "2,1,1,1", "--xi", "0.3,0.7")
        _, sequential = invoke(capsys, *argv)
        code, fanned = invoke(capsys, "sweep", argv[0], "--jobs", "3", *argv[1:])
        assert code == 0
        assert fanned == sequential

    def test_sweep_rejects_meta_targets(self, capsys):
        assert run(["sweep", "verify"]) == 2
        assert run(["sweep", "sweep"]) == 2


class TestVerify:
    def test_battery_passes(self, capsys):
        code, out = invoke(capsys, "verify")
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) >= 8
        assert all(line.startswith("ok ") for line in lines)

    def test_battery_is_seedable(self, capsys):
        assert run(["verify", "--seed", "123"]) == 0


class TestHorocycleTable:
    def test_error_shrinks_down_the_schedule(self, capsys):
        code, out = invoke(capsys, "horocycle", "--xi", "0.5,0.5", "--y", "0.2,0.02")
        assert code == 0
        _, rows = rows_of(out)
        errors = [float(r[3]) for r in rows]
        assert errors[1] < errors[0]
        limit = float(rows[0][2])
        assert math.isfinite(limit) and limit > 0
