import sys
from pathlib import Path

import pytest

from bffcheck.parser import parse_program

HERE = Path(__file__).parent
ROOT = HERE.parent
CORPUS = ROOT / "corpus"

sys.path.insert(0, str(HERE))
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


def load(name: str):
    return parse_program((CORPUS / name).read_text(encoding="utf-8"))


@pytest.fixture
def ce():
    return load("ce.bff")


@pytest.fixture
def add():
    return load("add.bff")


@pytest.fixture
def ks(ce):
    return ce.procedure("KS")
