import math
from pathlib import Path

import numpy as np
import pytest

from starspectra.io import load_config
from starspectra.model import PotentialSpec, StarProblem
from starspectra.spectrum import enumerate_eigenvalues

CONFIGS = Path(__file__).resolve().parents[1] / "src" / "starspectra" / "configs"

_ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """report(n, ok, detail) prints and records one acceptance line."""
    def _report(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok
    return _report


def smooth_q():
    q1 = PotentialSpec.piecewise([0, 1.0, math.pi], [[0.3, 0.2, -0.1], [0.5, 0.1]])
    xs = np.linspace(0, math.pi, 7)
    q2 = PotentialSpec.sampled(xs, np.sin(xs))
    return q1, q2, PotentialSpec.constant(0.7)


@pytest.fixture(scope="session")
def smooth_problem():
    return load_config(CONFIGS / "smooth.yaml").problem


@pytest.fixture(scope="session")
def zero_identity():
    return StarProblem.simple()


@pytest.fixture(scope="session")
def zero_identity_spectrum_60(zero_identity):
    return enumerate_eigenvalues(zero_identity, 60.3)


@pytest.fixture(scope="session")
def smooth_spectrum_60(smooth_problem):
    return enumerate_eigenvalues(smooth_problem, 60.3, strict=False)
