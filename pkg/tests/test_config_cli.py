"""Config parsing and the command line, including exit codes and traces."""

import csv
import math
import subprocess
import sys

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import numpy as np
import pytest

from degenppa.builtins import PROBLEM_NAMES, get_problem
from degenppa.cli import (
    EXIT_IO,
    EXIT_MAX_ITERS,
    EXIT_OK,
    EXIT_SOLVER_FAILURE,
    EXIT_USAGE,
    EXIT_VIOLATIONS,
    main,
)
from degenppa.config import parse_problem, parse_problem_dict
from degenppa.errors import ParseError
from degenppa.iteration import StopRule, iterate


# ---------------------------------------------------------------------------
# config parsing


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_builtin_configs_round_trip(name):
    built = get_problem(name)
    parsed = parse_problem_dict(tomllib.loads(built.toml_text), name=name)
    assert parsed.op.dim == built.op.dim
    assert parsed.metric.matrix == pytest.approx(built.metric.matrix)
    assert parsed.x0 == pytest.approx(built.x0)
    t1 = iterate(built.op, built.metric, built.x0, StopRule(max_iters=3))
    t2 = iterate(parsed.op, parsed.metric, parsed.x0, StopRule(max_iters=3))
    assert t1.stop_reason == t2.stop_reason
    for a, b in zip(t1.iterates, t2.iterates):
        assert a == pytest.approx(b, abs=0)


def _eg1_dict():
    return tomllib.loads(get_problem("eg1").toml_text)


def test_unknown_keys_rejected():
    data = _eg1_dict()
    data["bogus"] = {}
    with pytest.raises(ParseError, match="bogus"):
        parse_problem_dict(data)
    data = _eg1_dict()
    data["problem"]["extra"] = 1
    with pytest.raises(ParseError, match="extra"):
        parse_problem_dict(data)
    data = _eg1_dict()
    data["metric"]["typo"] = [1.0]
    with pytest.raises(ParseError, match="typo"):
        parse_problem_dict(data)


def test_missing_keys_rejected():
    data = _eg1_dict()
    del data["start"]
    with pytest.raises(ParseError, match="start"):
        parse_problem_dict(data)
    data = _eg1_dict()
    del data["metric"]
    with pytest.raises(ParseError, match="metric"):
        parse_problem_dict(data)


def test_metric_table_validation():
    data = _eg1_dict()
    data["metric"] = {"diag": [0.0, 1.0], "matrix": [1.0], "shape": [1, 1]}
    with pytest.raises(ParseError, match="not both"):
        parse_problem_dict(data)
    data["metric"] = {"matrix": [1.0, 0.0, 0.0, 1.0], "shape": [2, 3]}
    with pytest.raises(ParseError, match="shape"):
        parse_problem_dict(data)
    data["metric"] = {"matrix": [1.0, 0.0, 0.0], "shape": [2, 2]}
    with pytest.raises(ParseError, match="match"):
        parse_problem_dict(data)
    data["metric"] = {"matrix": [2.0, 1.0, 1.0, 2.0], "shape": [2, 2]}
    spec = parse_problem_dict(data)
    assert spec.metric.matrix == pytest.approx(np.array([[2.0, 1.0], [1.0, 2.0]]))


def test_x0_dimension_checked():
    data = _eg1_dict()
    data["start"]["x0"] = [1.0, 2.0, 3.0]
    with pytest.raises(ParseError, match="dim"):
        parse_problem_dict(data)


def test_unknown_names_rejected():
    data = _eg1_dict()
    data["problem"]["name"] = "EG9"
    with pytest.raises(ParseError, match="EG9"):
        parse_problem_dict(data)
    data = _eg1_dict()
    data["problem"] = {"kind": "mystery"}
    with pytest.raises(ParseError, match="mystery"):
        parse_problem_dict(data)


def test_coupling_validation():
    data = tomllib.loads(get_problem("counter-block").toml_text)
    data["problem"]["couplings"] = [[0, 0, -5.0]]
    with pytest.raises(ParseError, match="out of range"):
        parse_problem_dict(data)
    data["problem"]["couplings"] = [[0, 7, -5.0]]
    with pytest.raises(ParseError, match="out of range"):
        parse_problem_dict(data)
    data["problem"]["couplings"] = [[0, 1]]
    with pytest.raises(ParseError, match="couplings"):
        parse_problem_dict(data)


def test_block_kind_needs_blocks():
    data = tomllib.loads(get_problem("l1x").toml_text)
    del data["block"]
    with pytest.raises(ParseError, match="block"):
        parse_problem_dict(data)


def test_split_kinds_refuse_metric_table():
    data = tomllib.loads(get_problem("drs-lasso").toml_text)
    data["metric"] = {"diag": [1.0, 1.0, 1.0]}
    with pytest.raises(ParseError, match="derives its metric"):
        parse_problem_dict(data)


def test_fn_table_validation():
    data = tomllib.loads(get_problem("l1x").toml_text)
    data["block"][0]["kind"] = "spline"
    with pytest.raises(ParseError, match="spline"):
        parse_problem_dict(data)
    data["block"][0] = {"kind": "abs", "weight": 1.0, "slope": [1.0]}
    with pytest.raises(ParseError, match="slope"):
        parse_problem_dict(data)
    data["block"][0] = {"kind": "absquad", "weight": 1.0}
    with pytest.raises(ParseError, match="scale"):
        parse_problem_dict(data)


def test_stop_table():
    data = _eg1_dict()
    data["stop"] = {"max_iters": 7, "q_res_tol": 1e-6}
    spec = parse_problem_dict(data)
    assert spec.stop == StopRule(max_iters=7, q_res_tol=1e-6)
    data["stop"] = {"max_iters": 0}
    with pytest.raises(ParseError, match="positive"):
        parse_problem_dict(data)
    data["stop"] = {"patience": 3}
    with pytest.raises(ParseError, match="patience"):
        parse_problem_dict(data)


def test_parse_problem_file_errors(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        parse_problem(tmp_path / "absent.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("problem = [unclosed")
    with pytest.raises(ParseError, match="not valid TOML"):
        parse_problem(bad)


def test_parse_problem_from_file(tmp_path):
    path = tmp_path / "mine.toml"
    path.write_text(get_problem("l1y").toml_text)
    spec = parse_problem(path)
    assert spec.name == "mine"
    assert spec.op.dim == 2


# ---------------------------------------------------------------------------
# command line


def test_run_exit_codes(capsys):
    assert main(["run", "--problem", "eg1"]) == EXIT_OK
    assert "stop=tol" in capsys.readouterr().out
    assert main(["run", "--problem", "eg2"]) == EXIT_SOLVER_FAILURE
    assert "no single-valued" in capsys.readouterr().out
    assert main(["run", "--problem", "l1x", "--max-iters", "5"]) == EXIT_MAX_ITERS


def test_run_tol_override(capsys):
    assert main(["run", "--problem", "l1x", "--tol", "1e-3"]) == EXIT_OK
    out = capsys.readouterr().out
    # 2^-(k+1) <= 1e-3 * 4 first holds at k = 7, so 8 residuals are logged
    assert "iters=8" in out


def test_run_trace_csv(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    assert main(["run", "--problem", "drs-lasso", "--trace", str(path)]) == EXIT_OK
    capsys.readouterr()
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "x_0", "x_1", "x_2", "xr_0", "xr_1", "xr_2",
                       "q_residual", "fejer_gap"]
    assert rows[1] == ["1", "1.5", "2", "0.5", "0", "0", "0.5", "0.5", "0.5"]
    assert len(rows) == 35  # header plus the 34 logged steps
    assert all(float(r[-1]) >= 0.0 for r in rows[1:])


def test_run_trace_without_reference(tmp_path, capsys):
    # a config-loaded problem carries no known fixed point, so the gap
    # column degrades to nan rather than inventing a reference
    cfg = tmp_path / "lasso.toml"
    cfg.write_text(get_problem("drs-lasso").toml_text)
    path = tmp_path / "trace.csv"
    assert main(["run", "--problem", str(cfg), "--trace", str(path)]) == EXIT_OK
    capsys.readouterr()
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert math.isnan(float(rows[1][-1]))


def test_run_trace_io_error(tmp_path, capsys):
    missing = tmp_path / "nope" / "trace.csv"
    assert main(["run", "--problem", "eg1", "--trace", str(missing)]) == EXIT_IO
    assert "io error" in capsys.readouterr().err


def test_verify_exit_codes(capsys):
    assert main(["verify", "minty", "eg1"]) == EXIT_OK
    assert main(["verify", "minty", "eg2"]) == EXIT_VIOLATIONS
    assert main(["verify", "sri", "eg1"]) == EXIT_OK
    assert main(["verify", "sri", "eg3"]) == EXIT_VIOLATIONS
    capsys.readouterr()


def test_verify_problem_flag(capsys):
    assert main(["verify", "fixzer", "--problem", "l1x"]) == EXIT_OK
    capsys.readouterr()
    assert main(["verify", "fixzer", "l1x", "--problem", "l1y"]) == EXIT_USAGE
    assert "conflicting" in capsys.readouterr().err
    assert main(["verify", "fixzer"]) == EXIT_USAGE


def test_verify_report_file(tmp_path, capsys):
    path = tmp_path / "report.txt"
    assert main(["verify", "sri", "eg2", "--report", str(path)]) == EXIT_VIOLATIONS
    out = capsys.readouterr().out
    assert path.read_text().strip() == out.strip()
    assert "sri" in out


def test_usage_errors(capsys):
    assert main(["run", "--problem", "not-a-problem"]) == EXIT_USAGE
    assert main(["verify", "nonsense", "eg1"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["example", "not-a-problem"]) == EXIT_USAGE
    capsys.readouterr()


def test_bad_config_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("problem = 3\n")
    assert main(["run", "--problem", str(bad)]) == EXIT_USAGE
    assert "config error" in capsys.readouterr().err


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_example_output_parses(name, capsys):
    assert main(["example", name]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# ")
    spec = parse_problem_dict(tomllib.loads(out), name=name)
    assert spec.op.dim == get_problem(name).op.dim


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "degenppa", "example", "eg1"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert "graph2d" in proc.stdout
