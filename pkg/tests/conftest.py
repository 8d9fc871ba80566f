import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from asx.datasets import generate  # noqa: E402
from asx.geometry import normalize  # noqa: E402
from asx.learning import TrainConfig, train  # noqa: E402
from asx.simplices import model_from_training  # noqa: E402


@pytest.fixture(scope="session")
def circle_data():
    return normalize(generate("circle", 200, 0.0, seed=7))


@pytest.fixture(scope="session")
def circle_run(circle_data):
    return train(circle_data, TrainConfig(p=8, radius=1.0, epochs=50, seed=7))


@pytest.fixture(scope="session")
def circle_model(circle_run):
    return model_from_training(circle_run.basis, circle_run.activations, circle_run.trace)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance line: ``report(criterion, passed, detail)``."""
    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
