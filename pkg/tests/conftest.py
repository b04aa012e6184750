import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from couplecheck.lang import parse_program, typecheck  # noqa: E402
from couplecheck.prhl import parse_judgment  # noqa: E402

# fixed example sequences, so a run is reproducible
settings.register_profile("pinned", derandomize=True, database=None)
settings.load_profile("pinned")

CORPUS = Path(__file__).resolve().parents[1] / "src" / "couplecheck" / "corpus"


def corpus_source(name):
    return parse_program((CORPUS / f"{name}.pw").read_text())


def corpus_judgment(name):
    return parse_judgment((CORPUS / f"{name}.prf").read_text())


def typed(text, **bindings):
    return typecheck(parse_program(text), bindings)


@pytest.fixture
def corpus():
    return CORPUS


ACCEPTANCE: list = []   # (criterion number, line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
