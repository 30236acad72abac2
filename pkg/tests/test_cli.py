"""
Tests for the command line: argument handling, output and exit codes
"""

import io
import json
import sys

import pytest

from src.interface.cli import main, run
from src.interface.cli.commands import EXIT_FAILED, EXIT_OK, EXIT_USAGE, parse_config
from src.interface.cli.schemas import Mode, RunConfig


async def _run(service, config: RunConfig):
    out, err = io.StringIO(), io.StringIO()
    code = await run(config, out, err, service=service)
    return code, out.getvalue(), err.getvalue()


# ============================================================================
# Arguments
# ============================================================================

def test_mode_word_and_flags():
    assert parse_config(["a.kaisar"]).mode == Mode.CHECK
    assert parse_config(["conclusion", "a.kaisar"]).mode == Mode.CONCLUSION
    assert parse_config(["--metrics", "a.kaisar", "b.kaisar"]).paths == ["a.kaisar", "b.kaisar"]
    config = parse_config(["--proves", "[x := 1;] x > 0", "a.kaisar"])
    assert config.mode == Mode.PROVES
    assert config.proves == "[x := 1;] x > 0"


def test_flags_may_sit_between_mode_word_and_files():
    config = parse_config(["conclusion", "--dump-ssa", "a.kaisar", "--timings", "b.kaisar"])

    assert config.mode == Mode.CONCLUSION
    assert config.paths == ["a.kaisar", "b.kaisar"]
    assert config.dump_ssa and config.timings


def test_run_writes_to_the_current_stdout(tmp_path, monkeypatch):
    path = tmp_path / "ok.kaisar"
    path.write_text("x := 1; !(x > 0);", encoding="utf-8")
    captured = io.StringIO()
    monkeypatch.setattr(sys, "stdout", captured)

    assert main(["conclusion", str(path)]) == EXIT_OK
    assert captured.getvalue().strip() == "[x := 1;] x > 0"


def test_one_mode_per_invocation():
    with pytest.raises(ValueError, match="choose one mode"):
        parse_config(["--conclusion", "--metrics", "a.kaisar"])
    with pytest.raises(ValueError, match="choose one mode"):
        parse_config(["check", "--metrics", "a.kaisar"])


@pytest.mark.parametrize("argv", [
    [],
    ["--delta", "0", "a.kaisar"],
    ["--conclusion", "--metrics", "a.kaisar"],
    ["--format", "xml", "a.kaisar"],
])
def test_usage_errors_exit_2(argv):
    assert main(argv) == EXIT_USAGE


def test_missing_file_exits_2(tmp_path):
    assert main([str(tmp_path / "missing.kaisar")]) == EXIT_USAGE


def test_main_checks_files_on_disk(tmp_path, capsys):
    path = tmp_path / "ok.kaisar"
    path.write_text("x := 1; !(x > 0);", encoding="utf-8")

    assert main(["conclusion", str(path)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "[x := 1;] x > 0"


# ============================================================================
# Output
# ============================================================================

@pytest.mark.asyncio
async def test_check_summary_and_command_output(document_service):
    code, out, _ = await _run(document_service, RunConfig(paths=["commands.kaisar"]))

    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "commands.kaisar: ok, 1 obligation"
    assert lines[1] == "[x := *; y := x + 1;] y > x"


@pytest.mark.asyncio
async def test_failures_go_to_stderr(document_service):
    config = RunConfig(paths=["commands.kaisar", "mutations/wrong-circle.kaisar"])
    code, out, err = await _run(document_service, config)

    assert code == EXIT_FAILED
    assert "mutations/wrong-circle.kaisar: FAILED" in out
    assert "mutations/wrong-circle.kaisar:2:" in err


@pytest.mark.asyncio
async def test_json_report(document_service):
    config = RunConfig(paths=["prop-using.kaisar"], output_format="json", timings=True)
    code, out, _ = await _run(document_service, config)
    payload = json.loads(out)

    assert code == EXIT_OK
    (file_report,) = payload["files"]
    assert file_report["file"] == "prop-using.kaisar"
    assert file_report["ok"] is True
    (obligation,) = file_report["obligations"]
    assert obligation["verdict"] == "valid"
    assert obligation["procedure"] == "prop"
    assert obligation["milliseconds"] is not None


@pytest.mark.asyncio
async def test_proves_mode(document_service):
    config = RunConfig(paths=["commands.kaisar"], mode=Mode.PROVES,
                       proves="[x := *; y := x + 1;] y > x")
    code, out, _ = await _run(document_service, config)

    assert code == EXIT_OK
    assert "proves [x := *; y := x + 1;] y > x: ok" in out.splitlines()


@pytest.mark.asyncio
async def test_metrics_table(document_service):
    config = RunConfig(paths=["commands.kaisar", "prop-using.kaisar"], mode=Mode.METRICS)
    code, out, _ = await _run(document_service, config)

    assert code == EXIT_OK
    header, *rows = out.splitlines()
    assert header.split() == ["file", "lines", "model", "proof", "using"]
    assert rows[-1].split() == ["total", "6", "2", "4", "1"]


@pytest.mark.asyncio
async def test_dumps(document_service):
    config = RunConfig(
        paths=["backward-label.kaisar"], dump_ssa=True, dump_labels=True, dump_obligations=True
    )
    _, out, _ = await _run(document_service, config)

    assert "--- ssa: backward-label.kaisar" in out
    assert "--- labels: backward-label.kaisar" in out
    assert "init: " in out
    assert "--- obligations: backward-label.kaisar" in out
