from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def snli20_path() -> Path:
    return DATA_DIR / "snli20.jsonl"


@pytest.fixture
def stats20_path() -> Path:
    return DATA_DIR / "stats20.jsonl"
