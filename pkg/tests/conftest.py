"""
Pytest configuration and shared fixtures for gammakit tests
"""

import json
import os
import sys

import numpy as np
import pytest

# Add the repository root to the path so `src` imports resolve
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.config import reset_settings
from src.operator_core import OperatorTuple
from src.scalar_geometry import AlphaGrid


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Each test reads GAMMAKIT_* settings from a clean environment"""
    for name in list(os.environ):
        if name.startswith("GAMMAKIT_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("GAMMAKIT_THREADS", "2")
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def rng():
    """Seeded numpy generator"""
    return np.random.default_rng(20240917)


@pytest.fixture
def small_grid():
    """Coarse alpha grid: 4 rings of 32 angles plus 128 points on the circle"""
    return AlphaGrid.uniform(rings=4, angles=32)


@pytest.fixture
def diagonal_tuple():
    """n=2 tuple S1 = diag(2, 1/2), P = diag(1, 1/4): one unitary and one cnu direction"""
    return OperatorTuple(n=2, S=[np.diag([2.0, 0.5])], P=np.diag([1.0, 0.25]))


@pytest.fixture
def write_json(tmp_path):
    """Write a document into tmp_path and return its path"""
    def _write(name, document):
        path = tmp_path / name
        if isinstance(document, str):
            path.write_text(document, encoding='utf-8')
        else:
            path.write_text(json.dumps(document), encoding='utf-8')
        return path
    return _write


@pytest.fixture
def point_document():
    """Point (2, 1) of Gamma_2 as JSON"""
    return {"schema": "gammakit.point/1", "n": 2, "s": [[2.0, 0.0]], "p": [1.0, 0.0]}
