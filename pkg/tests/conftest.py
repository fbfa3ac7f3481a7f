import json
import math
from pathlib import Path

import numpy as np
import pytest

from malacert.potential import builtin

FIXTURES = Path(__file__).parent / "fixtures"


def rel_close(got, want, tol=1e-12):
    got, want = float(got), float(want)
    if want == got:
        return True
    return abs(got - want) <= tol * max(abs(want), 1.0)


def assert_rel(got, want, tol=1e-12, label=""):
    assert rel_close(got, want, tol), f"{label}: got {got!r}, want {want!r} (tol {tol:g})"


@pytest.fixture(scope="session")
def golden():
    with open(FIXTURES / "golden.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def gaussian1():
    return builtin("gaussian", 1)


@pytest.fixture(scope="session")
def gaussian2():
    return builtin("gaussian", 2)


@pytest.fixture(scope="session")
def bump1():
    return builtin("bump", 1, {"a": 0.3, "w": 1.0})


@pytest.fixture(scope="session")
def beta_tail2():
    return builtin("beta_tail", 2, {"beta": 0.5})


def batch_se(values: np.ndarray) -> float:
    """Batch-means standard error for a single correlated chain of scalars."""
    n = values.size
    n_batches = max(int(math.sqrt(n)), 2)
    size = n // n_batches
    trimmed = values[: n_batches * size].reshape(n_batches, size)
    means = trimmed.mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))
