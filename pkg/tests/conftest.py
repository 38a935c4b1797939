from pathlib import Path

import pytest

from benchaudit.aggregate import ingest_table
from benchaudit.results import ingest_efficiency, ingest_results

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def mean_cube():
    return ingest_results(DATA / "full_results_mean.csv")


@pytest.fixture(scope="session")
def ipatch_cube():
    return ingest_results(DATA / "ipatch_mean.csv")


@pytest.fixture(scope="session")
def efficiency():
    return ingest_efficiency(DATA / "efficiency.csv")


@pytest.fixture(scope="session")
def table2_mse():
    return ingest_table(FIXTURES / "table2_avg.csv", "MSE")


@pytest.fixture(scope="session")
def table2_mae():
    return ingest_table(FIXTURES / "table2_avg.csv", "MAE")


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p
    return _write


ACCEPTANCE_LINES = []


def record_acceptance(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
