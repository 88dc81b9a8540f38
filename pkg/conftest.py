"""Shared fixtures"""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from app.config import Settings
from app.main import app
from app.services.diagrams import parse_tree

BETA5_TEXT = "((1,2),(1,3),(2,3))"
# c^(1) = the edge from the center to the node carrying (2,3) and (1,4)
ONE_PATTERN_TEXT = "((1,2),(1,3),((2,3),(1,4)))"


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def beta5():
    return parse_tree(BETA5_TEXT)


@pytest.fixture
def one_pattern_tree():
    return parse_tree(ONE_PATTERN_TEXT)


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_json(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return str(path)

    return write
