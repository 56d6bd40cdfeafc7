import json
from pathlib import Path

import numpy as np
import pytest

from eoqubit import angular_momentum as am
from eoqubit.eo_model import default_model, toffoli_target
from eoqubit.pulse_sequence import load_bundled

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def toffoli(model):
    return toffoli_target(model)


@pytest.fixture(scope="session")
def basis():
    return am.basis_matrix()


@pytest.fixture(scope="session")
def jk_sequence():
    return load_bundled("toffoli_jk_92")


@pytest.fixture(scope="session")
def uncompressed_sequence():
    return load_bundled("toffoli_uncompressed_55")


@pytest.fixture(scope="session")
def published_expansions():
    with open(DATA / "published_expansions.json") as fh:
        return json.load(fh)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
