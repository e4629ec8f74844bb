import json

import pytest
from hypothesis import settings

from revdiff.cli import run
from revdiff.lattice import Grid
from revdiff.states import desk_grid, well_grid

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def desk() -> Grid:
    return desk_grid()


@pytest.fixture(scope="session")
def well() -> Grid:
    return well_grid()


def _run_all(tmp_path_factory, threads: int) -> dict:
    out = tmp_path_factory.mktemp(f"all_t{threads}")
    code, _ = run(["run", "all", "--seed", "42", "--threads", str(threads), "--out", str(out)])
    report = json.loads((out / "report.json").read_text())
    report["exit_code"] = code
    report["out"] = out
    return report


@pytest.fixture(scope="session")
def report_all(tmp_path_factory) -> dict:
    """Full desk-scale run, shared by the acceptance tests."""
    return _run_all(tmp_path_factory, 1)


@pytest.fixture(scope="session")
def report_all_threads8(tmp_path_factory) -> dict:
    return _run_all(tmp_path_factory, 8)


# one PASS/FAIL line per acceptance criterion in the terminal summary
_CRITERIA: dict[str, list[bool]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    key = name[len("test_") :]
    _CRITERIA.setdefault(key, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")

    def order(k):
        return int(k.split("_")[1])

    for key in sorted(_CRITERIA, key=order):
        verdict = "PASS" if all(_CRITERIA[key]) else "FAIL"
        terminalreporter.write_line(f"{verdict}  {key}")
