import binascii
from pathlib import Path

import pytest

from smoc.netgraph import load_topology

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
FRAMES = FIXTURES / "frames"
GOLDEN = Path(__file__).resolve().parent / "golden"


def read_hex(path) -> bytes:
    text = "".join(line.split("#", 1)[0] for line in Path(path).read_text().splitlines())
    return binascii.unhexlify("".join(text.split()))


@pytest.fixture(scope="session")
def topo1():
    return load_topology(FIXTURES / "topo1.txt")


@pytest.fixture(scope="session")
def topo2():
    return load_topology(FIXTURES / "topo2.txt")


@pytest.fixture(scope="session")
def diamond():
    return load_topology(FIXTURES / "diamond.txt")


@pytest.fixture(scope="session")
def chain():
    return load_topology(FIXTURES / "chain.txt")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
