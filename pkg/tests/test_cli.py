"""CLI surface: subcommands, exit codes, DOT artifacts, reproducibility."""
from __future__ import annotations

from pathlib import Path

import pytest

from faultiso import cli, dotexport, modelio
import faultiso as fi
from faultiso.gallery import twin_branch_text

MODELS = Path(__file__).resolve().parent.parent / "models"
TWIN = str(MODELS / "twin_branch.des")


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def supervisor_file(tmp_path, capsys):
    out = tmp_path / "twin.sup.json"
    code, _, _ = run_cli(capsys, "synth", TWIN, "--out", str(out))
    assert code == 0
    return str(out)


def test_check_fixture(capsys):
    code, out, _ = run_cli(capsys, "check", TWIN)
    assert code == 0
    assert "diagnosable: yes" in out
    assert "isolatable (uncontrolled): no" in out
    assert "{5F1,9F2} -> o3 -> {5F1,9F2}" in out


def test_check_not_diagnosable(tmp_path, capsys):
    model = tmp_path / "m.des"
    model.write_text(
        "event f fault=1\nevent o1 obs\ninit 0\n"
        "trans 0 f 1\ntrans 0 o1 0\ntrans 1 o1 1\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "check", str(model))
    assert code == cli.EXIT_NOT_DIAGNOSABLE
    assert "diagnosable: no" in out


def test_check_assumption_failure(tmp_path, capsys):
    model = tmp_path / "m.des"
    model.write_text(
        "event f fault=1\nevent o1 obs\ninit 0\ntrans 0 f 1\ntrans 0 o1 0\n",
        encoding="utf-8")  # state 1 is not live
    code, out, _ = run_cli(capsys, "check", str(model))
    assert code == cli.EXIT_ASSUMPTIONS
    assert "non-live" in out


def test_model_error_exit(tmp_path, capsys):
    model = tmp_path / "m.des"
    model.write_text("event e obs\ninit a\ntrans a e b\ntrans a e c\n", encoding="utf-8")
    code, _, err = run_cli(capsys, "check", str(model))
    assert code == cli.EXIT_MODEL
    assert "line 4" in err
    code, _, err = run_cli(capsys, "check", str(tmp_path / "missing.des"))
    assert code == cli.EXIT_MODEL


def test_diagnoser_stats_and_dot(tmp_path, capsys):
    dot = tmp_path / "d.dot"
    code, out, _ = run_cli(capsys, "diagnoser", TWIN, "--dot", str(dot))
    assert code == 0
    assert "diagnoser: 7 states, 4 events, 11 transitions" in out
    text = dot.read_text(encoding="utf-8")
    assert text.startswith("digraph")
    assert text.count("shape=ellipse") == 7


def test_synth_fixture(capsys):
    code, out, _ = run_cli(capsys, "synth", TWIN)
    assert code == 0
    assert "Y0: {1F1,6F2} {2F1,7F2}" in out
    assert "Ym: {3F1} {8F2}" in out
    assert "deadlock Z-states: 1" in out
    assert "good Y-states: 5" in out
    assert "solvable: yes" in out


def test_synth_paper_example_tie_break(capsys):
    code, out, _ = run_cli(capsys, "synth", TWIN, "--tie-break", "paper-example")
    assert code == 0
    assert "decision {1F1,6F2}: <o2,{}>" in out


def test_synth_not_solvable(tmp_path, capsys):
    text = twin_branch_text().replace("event o3 obs ctrl forc", "event o3 obs ctrl")
    model = tmp_path / "m.des"
    model.write_text(text, encoding="utf-8")
    code, out, _ = run_cli(capsys, "synth", str(model))
    assert code == cli.EXIT_NOT_SOLVABLE
    assert "solvable: no" in out
    assert "not good: {2F1,7F2}" in out


def test_synth_exit_matches_solvability(tmp_path, capsys, twin_plant, twin_pipeline):
    _, _, result, _ = twin_pipeline
    code, _, _ = run_cli(capsys, "synth", TWIN)
    assert (code == 0) == result.solvable


def test_synth_dot_drops_deadlock_box(tmp_path, capsys):
    dot = tmp_path / "bts.dot"
    code, _, _ = run_cli(capsys, "synth", TWIN, "--dot", str(dot))
    assert code == 0
    text = dot.read_text(encoding="utf-8")
    assert "({5F1,9F2},<~,{o3}>)" not in text  # pruned away
    assert '"({5F1,9F2},<~,{}>)"' in text


def test_bts_dot_full_graph(twin_plant, twin_bts):
    deadlocks = fi.find_deadlocks(twin_plant, twin_bts)
    text = dotexport.export_bts_dot(twin_bts, deadlocks=deadlocks)
    assert text.count("shape=ellipse") == 6
    assert text.count("shape=box") == 20
    assert text.count("color=red") == 1


def test_supervisor_dot_empty_policy():
    empty = fi.SupervisorPolicy(frozenset(), {})
    text = dotexport.export_supervisor_dot(empty)
    assert text == "digraph supervisor {\n  rankdir=LR;\n}\n"


def test_explain(capsys, supervisor_file):
    code, out, _ = run_cli(capsys, "explain", TWIN, supervisor_file,
                           "--obs", "o2,o3,o2")
    assert code == 0
    assert "final verdict: F2" in out
    assert "obs o2 -> estimate {2F1,7F2}" in out


def test_explain_protocol_error(capsys, supervisor_file):
    code, _, err = run_cli(capsys, "explain", TWIN, supervisor_file,
                           "--obs", "o2,o4")
    assert code == cli.EXIT_PROTOCOL
    assert "runtime" in err


def test_simulate_script_and_seed(capsys, supervisor_file):
    code, out, _ = run_cli(capsys, "simulate", TWIN, supervisor_file,
                           "--script", "sf1,o2,o3,o1")
    assert code == 0
    assert "DEC enforce=o3 disable={}" in out
    code, out1, _ = run_cli(capsys, "simulate", TWIN, supervisor_file,
                            "--seed", "5", "--steps", "9")
    code, out2, _ = run_cli(capsys, "simulate", TWIN, supervisor_file,
                            "--seed", "5", "--steps", "9")
    assert out1 == out2
    assert out1.startswith("SEED 5\n")


def test_simulate_bad_script(capsys, supervisor_file):
    code, _, err = run_cli(capsys, "simulate", TWIN, supervisor_file,
                           "--script", "o3")
    assert code == cli.EXIT_PROTOCOL
    assert "not admissible" in err


def test_outputs_reproducible(capsys, tmp_path):
    results = []
    for _ in range(2):
        code, out, _ = run_cli(capsys, "synth", TWIN)
        results.append(out)
    assert results[0] == results[1]
    code, out_a, _ = run_cli(capsys, "check", TWIN)
    code, out_b, _ = run_cli(capsys, "check", TWIN)
    assert out_a == out_b


def test_console_script_wiring(tmp_path):
    import subprocess, sys
    proc = subprocess.run([sys.executable, "-m", "faultiso.cli", "check", TWIN],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "diagnosable: yes" in proc.stdout


def test_supervisor_file_is_canonical(supervisor_file, capsys, tmp_path):
    first = Path(supervisor_file).read_text(encoding="utf-8")
    out2 = tmp_path / "again.json"
    run_cli(capsys, "synth", TWIN, "--out", str(out2))
    assert out2.read_text(encoding="utf-8") == first
    doc = modelio.parse_supervisor(first)
    assert doc.tie_break == "default"
