from __future__ import annotations

from pathlib import Path

import pytest

from qrt.syntax import parse

CORPUS = Path(__file__).parent / "corpus"

# the refactoring catalog, written out independently of the engine's annotations
EXPECTED_ROWS = frozenset({
    "Rename Variable", "Rename Parameter", "Rename Operation",
    "Add Parameter", "Remove Parameter", "Reorder Parameters",
    "Extract Operation", "Extract Function from Operation", "Extract Namespace",
    "Inline Operation", "Inline Function into Operation",
    "Split Operation", "Merge Operations", "Parameterize Operation", "Specialize Operation",
    "Merge Gate", "Replace Gate", "Reorder Instructions", "Order Qubit", "Consolidate Measurement",
    "Unroll Loop", "Introduce Classical Control",
    "Remove Variable", "Remove Operation", "Remove Code Duplication",
})


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.qs"))


def load(name: str):
    path = CORPUS / name
    return parse(path.read_text(encoding="utf-8"), file=str(path))


def source(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


@pytest.fixture
def hello():
    return load("hello_world.qs")


@pytest.fixture
def sim_before():
    return load("simulation_before.qs")


@pytest.fixture
def sim_after():
    return load("simulation_after.qs")
