from __future__ import annotations

import subprocess
import sys

import pytest

from aldwych.cli import main, parse_args
from aldwych.core import parse_core
from aldwych.normalize import alpha_equivalent
from conftest import CORPUS, PROGRAMS, lenient_core, source


@pytest.fixture
def program(tmp_path):
    def make(*names, text=None):
        path = tmp_path / "prog.aw"
        path.write_text(text if text is not None else source(*names))
        return str(path)

    return make


def test_parse_args_defaults():
    cfg = parse_args(["run", "f.aw", "--", "a", "b"])
    assert (cfg.seed, cfg.max_steps, cfg.trace, cfg.entry) == (0, 1_000_000, False, "main")
    assert cfg.args == ["a", "b"]


def test_negative_seed_is_usage_error(capsys):
    assert main(["run", "f.aw", "--seed", "-1"]) == 2


def test_unknown_command(capsys):
    assert main(["frobnicate", "f.aw"]) == 2


def test_check_valid(capsys):
    assert main(["check", str(CORPUS / "s4_merge.aw")]) == 0


def test_check_invalid(capsys):
    assert main(["check", str(CORPUS / "s6_invalid_fragment.aw")]) == 1
    out = capsys.readouterr().out
    assert "ERROR HandleInFutureTuple" in out
    assert f"{CORPUS / 's6_invalid_fragment.aw'}:6:3" in out


def test_check_handle_in_tuple(program, capsys):
    assert main(["check", program(text="#p(x, U) → y { x=a || y=k(U, x) }")]) == 1
    assert "HandleInFutureTuple" in capsys.readouterr().out


def test_missing_file(capsys):
    assert main(["check", "/nonexistent/file.aw"]) == 2
    assert "ERROR IO" in capsys.readouterr().err


def test_emit_core_round_trips(capsys):
    assert main(["emit-core", str(CORPUS / "s3_p.aw")]) == 0
    text = capsys.readouterr().out
    assert alpha_equivalent(parse_core(text), lenient_core(source("s3_p_expanded")))


def test_emit_core_stage_broadcast(capsys):
    assert main(["emit-core", str(CORPUS / "s6_counter.aw"), "--stage", "broadcast"]) == 0
    text = capsys.readouterr().out
    assert text.count("|") >= 6 and "Priv" in text


def test_emit_core_empty_program(program, capsys):
    assert main(["emit-core", program(text="")]) == 0
    assert capsys.readouterr().out.strip() == "%aldwych-core 1"


def test_emit_logic(capsys):
    assert main(["emit-logic", str(CORPUS / "s2_p.aw")]) == 0
    assert capsys.readouterr().out.startswith("p(f(W), V, X, Y) :- ")


def test_run_delbetween(program, capsys):
    assert main(["run", program("delbetween_main"), "--", "a", "stop", "b", "c", "start", "d"]) == 0
    assert capsys.readouterr().out == "a\nd\n"


def test_run_deadlock(program, capsys):
    assert main(["run", program("deadlock")]) == 3
    err = capsys.readouterr().err
    assert "pid 2" in err and "pid 3" in err


def test_run_step_limit(program, capsys):
    src = "#spin(x) { x=go | }\n#main(argv) → out { || spin('go'), out$ }"
    assert main(["run", program(text=src), "--max-steps", "100"]) == 4


def test_run_unknown_entry(program, capsys):
    assert main(["run", program("deadlock"), "--entry", "nothere"]) == 2


def test_run_trace_goes_to_stderr(program, capsys):
    assert main(["run", program("delbetween_main"), "--trace", "--", "x"]) == 0
    cap = capsys.readouterr()
    assert cap.out == "x\n"
    assert cap.err.splitlines()[0].startswith("1 SPAWN 1 main")


def test_run_reproducible(program, capsys):
    path = program("counter_main", "s6_counter")
    outs = []
    for _ in range(2):
        assert main(["run", path, "--seed", "5", "--trace"]) == 0
        cap = capsys.readouterr()
        outs.append((cap.out, cap.err))
    assert outs[0] == outs[1]


def test_console_script_entry(tmp_path):
    path = tmp_path / "d.aw"
    path.write_text(source("delbetween_main"))
    r = subprocess.run(
        [sys.executable, "-m", "aldwych.cli", "run", str(path), "--", "a", "stop", "b"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0 and r.stdout == "a\n"
