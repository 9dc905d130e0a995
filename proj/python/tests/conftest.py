import os
from pathlib import Path

import pytest

ROOT = Path(os.environ.get("ABSYNTH_ROOT", Path(__file__).resolve().parents[2]))


@pytest.fixture
def root():
    return ROOT


@pytest.fixture
def pyexpr_grammar():
    import absynth
    return absynth.Grammar.load(str(ROOT / "grammars" / "pyexpr.asdl"), "stmt")


@pytest.fixture
def sql_grammar():
    import absynth
    return absynth.Grammar.load(str(ROOT / "grammars" / "wikisql.asdl"), "stmt")
