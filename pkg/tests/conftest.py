"""
Test fixtures and utilities for the 4+1 toolkit tests
"""

import shutil
import sys
import tempfile
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from architecture_parser import parse  # noqa: E402

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def load_fixture(name: str):
    result = parse(fixture_text(name), name)
    assert result.ok, [d.format() for d in result.diagnostics]
    return result.model


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def pabx_text():
    return fixture_text("pabx.arch")


@pytest.fixture
def pabx_model():
    """Telec PABX: all five views, clean in strict mode"""
    return load_fixture("pabx.arch")


@pytest.fixture
def atc_text():
    return fixture_text("atc.arch")


@pytest.fixture
def atc_model():
    """ATC line of products: logical and development views only"""
    return load_fixture("atc.arch")


@pytest.fixture
def flight_model():
    return load_fixture("flight_mapping.arch")


@pytest.fixture
def fixture_path(temp_dir):
    """Copy a fixture into the temp dir and return its path"""

    def copy(name: str, text: str = None) -> str:
        target = Path(temp_dir) / name
        target.write_text(text if text is not None else fixture_text(name), encoding="utf-8")
        return str(target)

    return copy
