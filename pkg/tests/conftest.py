import json
from pathlib import Path

import pytest

from subalign import load_vocab

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def fixture_vocab():
    return load_vocab(DATA / "vocab_fixture.txt")


@pytest.fixture(scope="session")
def reference_tokenizations():
    return json.loads((DATA / "wordpiece_reference.json").read_text(encoding="utf-8"))
