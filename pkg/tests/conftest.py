from __future__ import annotations

import pytest

from flowfault.config import RunConfig, parse_config

from helpers import SMALL_CFG_TEXT

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def small_cfg() -> RunConfig:
    return parse_config(SMALL_CFG_TEXT)


@pytest.fixture
def small_cfg_file(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    results = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        results[number] = (title, bool(ok), detail)
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d}. {title}: {detail}")
    passed = sum(ok for _, ok, _ in results.values())
    terminalreporter.write_line(f"{passed}/{len(results)} acceptance criteria passed")
