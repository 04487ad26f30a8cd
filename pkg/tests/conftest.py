import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from driftknn.geometry import SourceDataset


def random_source(rng, n, d, tag="P", strength=None, grid=None):
    """Labeled points with a linear posterior of random strength.

    ``grid`` snaps covariates to multiples of 1/grid so distance ties occur.
    """
    X = rng.random((n, d))
    if grid:
        X = np.round(X * grid) / grid
    if strength is None:
        strength = rng.choice([0.0, 0.3, 1.0, 2.0])
    eta = np.clip(0.5 + strength * (X[:, 0] - 0.5), 0, 1)
    y = (rng.random(n) < eta).astype(int)
    return SourceDataset(X, y, tag)


def random_instance(rng, max_total=200, allow_empty_q=True):
    d = int(rng.integers(1, 4))
    total = int(rng.integers(1, max_total + 1))
    n_P = int(rng.integers(0 if allow_empty_q else 1, total + 1))
    n_Q = total - n_P
    if n_P == 0 and n_Q == 0:
        n_P = 1
    grid = rng.choice([None, 4, 10])
    strength = rng.choice([0.0, 0.5, 2.0, 50.0])
    P = random_source(rng, n_P, d, "P", strength, grid)
    Q = random_source(rng, n_Q, d, "Q", strength, grid)
    query = rng.random(d)
    if grid:
        query = np.round(query * grid) / grid
    return P, Q, query


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion_report(request):
    """Record one summary line per acceptance criterion; printed after the run."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, passed, detail):
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        lines.append((number, f"criterion {number}: {status}  {detail}"))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda item: item[0]):
            terminalreporter.write_line(line)
