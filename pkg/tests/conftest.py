from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

import dwellcert
from dwellcert.io import parse_system_file
from dwellcert.pipeline import analyze

DATA = Path(dwellcert.__file__).parent / "data"


def example1_matrices():
    c = 1.0 / (np.sqrt(2.0) + 2.0)
    A1 = c * np.array([[0.0, 0.0], [1.0, 0.0]])
    A2 = c * np.array([[-2.0, -2.0], [-1.0, -2.0]])
    return A1, A2


@pytest.fixture(scope="session")
def example1():
    return parse_system_file(DATA / "example1.json")[0]


@pytest.fixture(scope="session")
def example2():
    return parse_system_file(DATA / "example2.json")[0]


@pytest.fixture(scope="session")
def example1_analysis(example1):
    return analyze(example1, 0.2)
