import numpy as np
import pytest

from privfair.data import Dataset, SensitiveTable

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"


def make_dataset(n=200, seed=0, p_group=0.3, k=2, label_noise=0.6):
    """Small random mixed-feature dataset with aligned sensitive groups."""
    rng = np.random.Generator(np.random.PCG64(seed))
    x1 = rng.normal(0, 1, n)
    x2 = rng.choice(["a", "b", "c"], n)
    x3 = rng.integers(0, 10, n).astype(float)
    y = ((x1 + 0.8 * (x2 == "a") + 0.15 * x3 + rng.normal(0, label_noise, n)) > 0.8).astype(int)
    ds = Dataset(
        np.arange(n),
        ("x1", "x2", "x3"),
        {"x1": "numeric", "x2": "categorical", "x3": "numeric"},
        {"x1": x1, "x2": x2, "x3": x3},
        y,
    )
    if k == 2:
        groups = (rng.random(n) < p_group).astype(int)
        names = ("g0", "g1")
    else:
        groups = rng.integers(0, k, n)
        names = tuple(f"g{i}" for i in range(k))
    table = SensitiveTable(np.arange(n), "g", groups, names)
    return ds, table


@pytest.fixture
def small_data():
    return make_dataset(n=240, seed=3)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
