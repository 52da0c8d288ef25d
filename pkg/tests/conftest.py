import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prioloss import Exponential, SystemModel  # noqa: E402

CONFIG_DIR = Path(__file__).parent.parent / "configs"


@pytest.fixture
def benchmark():
    """Three classes, two servers, exponential service at rates 10, 5, 2."""
    return SystemModel.build(2, [(1.0, Exponential(10.0)), (1.0, Exponential(5.0)), (1.0, Exponential(2.0))])


ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion outcome for the end-of-run summary."""
    name = request.node.name

    def record(ok: bool, detail: str = "") -> bool:
        ACCEPTANCE[name] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(ACCEPTANCE.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
