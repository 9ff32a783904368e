import shutil
from pathlib import Path

import pytest

from ipsmp.frontend import load, load_file

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
HAVE_Z3 = shutil.which("z3") is not None

needs_solver = pytest.mark.skipif(not HAVE_Z3, reason="no HORN solver on PATH")


def corpus_file(name, require_main=True):
    return load_file(CORPUS / name, require_main=require_main)


def checked(text, require_main=True):
    return load(text, require_main)


def boolean_corpus(n=60, seed=0, **kw):
    """Random Boolean programs within the acceptance size limits (3 vars, 8 locations, 2 predicates)."""
    import random

    from ipsmp.randprog import random_boolean_program

    rng = random.Random(seed)
    return [random_boolean_program(rng, **kw) for _ in range(n)]


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
