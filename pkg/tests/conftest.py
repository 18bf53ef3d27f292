import json
import os
from pathlib import Path

import pytest

from pfzeros.cli import main


@pytest.fixture
def run_cli(tmp_path, capsys):
    """Run the CLI in-process; returns (exit code, out dir, stderr JSON lines)."""
    counter = {"n": 0}

    def run(*args, out=None):
        counter["n"] += 1
        out = Path(out) if out is not None else tmp_path / f"run{counter['n']}"
        code = main([*map(str, args), "--out", str(out)])
        err = capsys.readouterr().err
        lines = [json.loads(l) for l in err.splitlines() if l.strip().startswith("{")]
        return code, out, lines

    return run


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch):
    monkeypatch.delenv("PFZEROS_THREADS", raising=False)
    yield


ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
