from pathlib import Path

import pytest

from diagbisim.diagram import load_diagram
from diagbisim.etim import load_etim

DATA = Path(__file__).parent / "data"


def data_path(name: str) -> Path:
    return DATA / name


def diagram(name: str):
    return load_diagram(data_path(f"{name}.json").read_text())


def etim_file(name: str):
    return load_etim(data_path(f"{name}.etim.json").read_text())


@pytest.fixture(scope="session")
def F():
    return diagram("F")


@pytest.fixture(scope="session")
def G():
    return diagram("G")


@pytest.fixture(scope="session")
def H():
    return diagram("H")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
