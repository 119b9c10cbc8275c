import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixture_path():
    return FIXTURES


@pytest.fixture(scope="module")
def fixture_path_mod():
    return FIXTURES
