from pathlib import Path

import numpy as np
import pytest

from crpsdesign.experiment import Dataset, load_dataset

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
PHOTOSWITCH = DATA_DIR / "photoswitch.csv"


def random_fingerprints(rng, n, d=64, density=0.2):
    """Distinct binary rows, none all-zero."""
    seen, rows = set(), []
    while len(rows) < n:
        row = (rng.random(d) < density).astype(np.uint8)
        key = row.tobytes()
        if row.any() and key not in seen:
            seen.add(key)
            rows.append(row)
    return np.array(rows)


def toy_dataset(n=60, d=64, seed=0, synthetic=False):
    rng = np.random.default_rng(seed)
    X = random_fingerprints(rng, n, d)
    # smooth-ish response: linear in bits plus noise
    w = rng.normal(0, 10, d)
    f = 400 + X @ w
    z = f + rng.normal(0, 3, n)
    ids = tuple(f"m{i:03d}" for i in range(n))
    if synthetic:
        return Dataset(ids, X, z, f, 9.0)
    return Dataset(ids, X, z)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def photoswitch():
    return load_dataset(PHOTOSWITCH)


@pytest.fixture(scope="session")
def small_data():
    return toy_dataset()


@pytest.fixture(scope="session")
def small_synthetic():
    return toy_dataset(synthetic=True)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
