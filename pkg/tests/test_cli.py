import json
import os
import sys

import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.config import get_settings
from app.main import main
from app.services.farey_service import FareyService


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_intersect(capsys):
    code, out, _ = run(capsys, "intersect", "1/0", "0/1")
    report = json.loads(out)
    assert code == 0
    assert report["result"] == 1
    assert report["app"] == get_settings().APP_NAME
    assert report["version"] == get_settings().VERSION
    assert report["config"]["subcommand"] == "intersect"
    assert report["config"]["inputs"] == {"s1": "1/0", "s2": "0/1"}


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "[[2,1],[1,1]]")
    result = json.loads(out)["result"]
    assert code == 0
    assert result["kind"] == "pseudo_anosov"
    assert {k: result["dilatation"][k] for k in "abcD"} == {"a": "3", "b": "1", "c": "2", "D": "5"}


def test_constants_search(capsys):
    code, out, _ = run(capsys, "constants", "--c", "1", "--search")
    result = json.loads(out)["result"]
    assert code == 0
    assert (result["D_in_min"], result["sum_min"]) == (10, 14)
    assert result["p1"] == {"num": "14", "den": "1"}
    assert result["chain"]["accepted"]


def test_constants_rejected_chain_reports_failing_step(capsys):
    code, out, _ = run(capsys, "constants", "--c", "1", "--p", "13")
    chain = json.loads(out)["result"]["chain"]
    assert code == 0
    assert not chain["accepted"] and chain["failing_step"] == "translation"


def test_output_is_reproducible(capsys):
    argv = ("walk", "--free-rank", "2", "--steps", "12", "--seed", "4")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert json.loads(first)["config"]["seed"] == 4


def test_csv_output(capsys):
    code, out, _ = run(capsys, "growth", "--gens", "[[1,1],[0,1]]", "--radius", "3", "--csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "radius,size,rate"
    assert lines[1] == "0,1,"
    assert [line.split(",")[1] for line in lines[1:]] == ["1", "3", "5", "7"]


def test_walk_exact_rationals_are_structural(capsys):
    _, out, _ = run(capsys, "walk", "--gens", "[[1,2],[0,1]];[[1,0],[2,1]]", "--symmetrize", "--steps", "4")
    probs = json.loads(out)["result"]["table"]["probs"]
    assert probs[4] == {"num": "7", "den": "64"}


def test_hypothesis_violation_exits_2(capsys):
    code, out, err = run(capsys, "twist-pingpong", "--alpha", "1/0", "--a-power", "4",
                         "--beta", "1/0", "--b-power", "7")
    assert code == 2
    assert out == ""
    assert json.loads(err[err.index("{"):])["error"] == "NotIndependentError"


def test_internal_error_exits_1(capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(FareyService, "intersection", staticmethod(broken))
    code, out, _ = run(capsys, "intersect", "1/0", "0/1")
    assert code == 1
    assert out == ""


def test_malformed_input_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["classify", "[[2,x],[1,1]]"])
    assert e.value.code == 2
    assert "x" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as e:
        main(["solve"])
    assert e.value.code == 2


def test_zero_twist_power_is_not_a_missing_flag(capsys):
    code, out, err = run(capsys, "twist-check", "--axis", "1/0", "--power", "0",
                         "--delta", "0/1", "--delta-prime", "0/1")
    assert code == 2
    assert out == ""
    error = json.loads(err[err.index('{\n  "error"'):])
    assert error["error"] == "HypothesisError"
    assert "nonzero" in error["message"]


def test_explicit_zero_search_option_is_kept(capsys):
    code, out, err = run(capsys, "find-free", "--gens", "[[1,3],[0,1]];[[1,0],[3,1]]", "--oracle-depth", "0")
    assert code == 2
    assert out == ""
    assert json.loads(err[err.index('{\n  "error"'):])["error"] == "HypothesisError"


def test_reproduce_quick(capsys):
    code, out, _ = run(capsys, "reproduce", "--quick")
    report = json.loads(out)
    assert code == 0
    assert report["result"]["passed"] is True
    assert all(criterion["passed"] for criterion in report["result"]["criteria"])
