import pytest

from reflectofold.doubling import canonical_sequence
from reflectofold.golden import load_golden
from reflectofold.reflectofold import builtin_gluings, facet_classes

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def states():
    return canonical_sequence()


@pytest.fixture(scope="session")
def gluings():
    return builtin_gluings()


@pytest.fixture(scope="session")
def golden():
    return load_golden()


@pytest.fixture(scope="session")
def reflectofolds(states, gluings):
    return {name: facet_classes(states[g.base_index], g) for name, g in gluings.items()}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
