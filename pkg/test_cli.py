"""End-to-end tests of the dimcodes command line through ``run``."""

import importlib.util
import io
import json
from pathlib import Path

import pandas as pd
import pytest

from dimcodes.cli import build_parser, figure_data, run
from dimcodes.exceptions import DomainError
from dimcodes.items import Fig1Row, Fig2Row, Fig3Row


def read_csv(path):
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    meta = [line for line in lines if line.startswith("#")]
    frame = pd.read_csv(io.StringIO("\n".join(line for line in lines if not line.startswith("#"))))
    return meta, frame


# Figures

def test_fig2_transition_row():
    model, rows = figure_data("fig2", 0.01)
    assert model is Fig2Row
    marked = [row for row in rows if row.transition]
    assert len(marked) == 1
    assert marked[0].t == pytest.approx(0.127571, abs=1e-6)
    assert marked[0].worst == pytest.approx(0.292893, abs=1e-6)
    assert [row.t for row in rows] == sorted(row.t for row in rows)


def test_fig1_transition_row():
    model, rows = figure_data("fig1", 0.01)
    assert model is Fig1Row
    marked = [row for row in rows if row.transition]
    assert marked[0].s == pytest.approx(0.831832, abs=1e-6)
    assert marked[0].worst == pytest.approx(0.110028, abs=1e-6)
    assert rows[0].s == 0.5 and rows[-1].s == 1.0


def test_fig3_starts_at_zero():
    model, rows = figure_data("fig3", 0.005)
    assert model is Fig3Row
    assert rows[0].d == 0.0 and rows[0].f == 0.0
    assert all(row.lower <= row.f + 1e-9 <= row.upper + 2e-9 for row in rows)


def test_figure_data_rejects_bad_input():
    with pytest.raises(DomainError):
        figure_data("fig4")
    with pytest.raises(DomainError):
        figure_data("fig1", 0.02)


def test_figure_command_writes_csv(tmp_path):
    out = tmp_path / "fig2.csv"
    result = run(["figure", "fig2", "--out", str(out)])
    assert result.status == 0
    meta, frame = read_csv(out)
    assert meta[0] == "# dimcodes 0.1.0 figure"
    assert meta[2] == "# seeds=[]"
    assert list(frame.columns) == ["t", "worst", "min_distance", "transition"]
    assert frame["transition"].sum() == 1
    assert result.summary["rows"] == len(frame)


# Bounds and codes

def test_bounds(tmp_path):
    out = tmp_path / "bounds.json"
    result = run(["bounds", "--s", "0.5", "--t", "0.127571", "--format", "json", "--out", str(out)])
    assert result.status == 0
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["meta"]["params"]["s"] == 0.5
    record = document["records"][0]
    assert record["min_distance"] <= record["max_distance"]
    assert record["max_distance"] == pytest.approx(0.292893, abs=1e-5)


def test_code_build_and_verify(tmp_path):
    out = tmp_path / "code.txt"
    result = run(["code", "build", "--n", "8", "--r", "2", "--verify", "--out", str(out)])
    assert result.status == 0
    assert result.summary["covering"] and result.summary["well_distributed"]
    report = tmp_path / "report.csv"
    assert run(["code", "verify", "--n", "8", "--r", "2", "--file", str(out), "--out", str(report)]).status == 0
    _, frame = read_csv(report)
    assert (frame["max_count"] <= frame["bound"]).all()


def test_code_verify_failing_file(tmp_path):
    path = tmp_path / "weak.txt"
    path.write_text("covercode v1 n=4 r=1 seed=0 S=1\n0000\n", encoding="ascii")
    result = run(["code", "verify", "--n", "4", "--r", "1", "--file", str(path), "--out", str(tmp_path / "r.csv")])
    assert result.status == 1
    assert "failed" in result.summary["error"]


def test_code_verify_malformed_file(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("not a code\n", encoding="ascii")
    assert run(["code", "verify", "--n", "4", "--r", "1", "--file", str(path)]).status == 2


def test_code_mincover(tmp_path):
    result = run(["code", "mincover", "--n", "4", "--r", "1", "--out", str(tmp_path / "k.csv")])
    assert result.status == 0
    assert result.summary["k_exact"] == 4


# Sources

def test_gen_bernoulli_zero(tmp_path):
    out = tmp_path / "bits.txt"
    assert run(["gen", "--kind", "bernoulli", "--p", "0", "--n", "100", "--out", str(out)]).status == 0
    assert out.read_text(encoding="ascii") == "0" * 100 + "\n"


def test_gen_packed(tmp_path):
    out = tmp_path / "bits.bin"
    assert run(["gen", "--kind", "ones", "--n", "10", "--packed", "--out", str(out)]).status == 0
    data = out.read_bytes()
    assert data == (10).to_bytes(8, "little") + bytes([0xFF, 0xC0])


def test_gen_codeword(tmp_path):
    out = tmp_path / "cw.txt"
    result = run(["gen", "--kind", "codeword", "--s", "0.5", "--n", "300", "--out", str(out)])
    assert result.status == 0
    assert result.summary["descriptor"].startswith("codeword:")
    assert len(out.read_text(encoding="ascii").strip()) == 300


def test_profile_between_descriptors(tmp_path):
    result = run(["profile", "--a", "ones:", "--b", "zeros:", "--n", "100", "--out", str(tmp_path / "p.csv")])
    assert result.status == 0
    assert result.summary["final"] == 1.0


# Transforms

def test_transform_raise(tmp_path):
    result = run(["transform", "raise", "--s", "0.5", "--t", "1.0", "--n", "200000", "--out", str(tmp_path / "r.csv")])
    assert result.status == 0
    assert result.summary["distance"] == pytest.approx(result.summary["expected"], abs=0.005)


def test_transform_lower_bernoulli(tmp_path):
    positions = tmp_path / "positions.csv"
    result = run(["transform", "lower-bernoulli", "--s", "0.5", "--t", "0.2", "--n", "12000",
                  "--out", str(tmp_path / "d.csv"), "--positions", str(positions)])
    assert result.status == 0
    assert result.summary["max_block_changes"] <= result.summary["radius"]
    _, frame = read_csv(positions)
    assert list(frame.columns) == ["position"]


def test_transform_lower_worst(tmp_path):
    schedule = tmp_path / "schedule.json"
    result = run(["transform", "lower-worst", "--s", "0.5", "--t", "0.3", "--n", "5000",
                  "--out", str(tmp_path / "d.csv"), "--schedule", str(schedule)])
    assert result.status == 1
    assert result.summary["stages"] == 2
    assert result.summary["ledger_ratio"] > 0.3 + 0.07
    assert not result.summary["certified"]
    assert result.summary["note"].startswith("not certified")
    document = json.loads(schedule.read_text(encoding="utf-8"))
    assert document["schedule"]["ell"] == [100, 864]


def test_transform_lower_worst_below_breakpoint(tmp_path):
    result = run(["transform", "lower-worst", "--s", "0.5", "--t", "0.1", "--n", "5000",
                  "--out", str(tmp_path / "d.csv")])
    assert result.status == 2
    assert "1 - H" in result.summary["error"]


def test_account_round_trip(tmp_path):
    bitstream = tmp_path / "ledger.txt"
    result = run(["account", "--n", "2000", "--out", str(tmp_path / "l.csv"), "--bitstream", str(bitstream)])
    assert result.status == 0
    assert result.summary["round_trip"]
    assert result.summary["membership_violations"] == 0
    assert len(bitstream.read_text(encoding="ascii").strip()) == result.summary["total_bits"]


# Exit codes and determinism

@pytest.mark.parametrize("argv", [[], ["figure", "fig4"], ["bounds", "--s", "0.5"], ["code", "build", "--n", "x"]])
def test_usage_errors(argv):
    assert run(argv).status == 2


def test_bad_grid_is_a_usage_error(tmp_path):
    result = run(["figure", "fig1", "--grid", "0.5", "--out", str(tmp_path / "f.csv")])
    assert result.status == 2


def test_help_exits_cleanly():
    assert run(["--help"]).status == 0


@pytest.mark.parametrize("argv", [
    ["figure", "fig3", "--grid", "0.005"],
    ["bounds", "--s", "0.7", "--t", "0.2"],
    ["profile", "--s", "0.5", "--n", "3000", "--seed", "4"],
    ["account", "--n", "1500", "--seed", "2", "--format", "json"],
])
def test_reruns_are_byte_identical(tmp_path, argv):
    first, second = tmp_path / "first", tmp_path / "second"
    assert run(argv + ["--out", str(first)]).status == 0
    assert run(argv + ["--out", str(second)]).status == 0
    assert first.read_bytes() == second.read_bytes()


def load_acceptance_runner():
    path = Path(__file__).parent / "utils" / "run_acceptance.py"
    spec = importlib.util.spec_from_file_location("run_acceptance", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def test_acceptance_steps_parse(tmp_path):
    steps = load_acceptance_runner().cli_steps(str(tmp_path))
    parser = build_parser()
    for step in steps:
        args = parser.parse_args(step.command[3:])
        assert callable(args.handler)
    assert [step.name for step in steps if step.accept != (0,)] == ["lower-worst"]
