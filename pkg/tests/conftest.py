import functools

import pytest

from wickstar.expr import jet_from_text
from wickstar.geometry import build_kaehler
from wickstar.jets import JetContext

FS = "log(1 + z1*zbar1)"
HYP = "-log(1 - z1*zbar1)"
FLAT1 = "z1*zbar1"
FLAT2 = "z1*zbar1 + z2*zbar2"


@functools.lru_cache(maxsize=None)
def kaehler(potential: str, n: int = 1, J: int = 10, T: int = 8):
    """Cached Kähler data; tests share geometry but never mutate it."""
    ctx = JetContext(n, J)
    return build_kaehler(jet_from_text(potential, ctx), deg_cap=T)


def jet(text: str, ctx):
    return jet_from_text(text, ctx)


@pytest.fixture
def ctx1():
    return JetContext(1, 6)


@pytest.fixture
def ctx2():
    return JetContext(2, 6)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
