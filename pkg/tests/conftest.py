import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from localgram.resources import DEMO, DEMO_DIR, load_graphs, load_lexicon, load_schema  # noqa: E402


@pytest.fixture(scope="session")
def demo_lexicon():
    return load_lexicon(DEMO.lexicon, DEMO.rules)


@pytest.fixture(scope="session")
def demo_graphs():
    return load_graphs(DEMO.graphs, DEMO.main)


@pytest.fixture(scope="session")
def demo_rtn(demo_graphs):
    from localgram import compile_graphset
    return compile_graphset(demo_graphs)


@pytest.fixture(scope="session")
def demo_schema():
    return load_schema(DEMO.schema)


@pytest.fixture(scope="session")
def recursion_graphs():
    return load_graphs(DEMO_DIR / "recursion" / "INTENSIFIER.lgg", "INTENSIFIER")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
