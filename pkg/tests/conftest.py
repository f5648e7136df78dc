from __future__ import annotations

import numpy as np
import pytest

from qldp.common import DEFAULT_SEED

STANDARD_Q = (0.5, 1.0, 1.5)
STANDARD_N = (100, 1000, 10000)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture(scope="session")
def simplex_pairs() -> list[tuple[np.ndarray, np.ndarray]]:
    """10^4 seeded (p, r) pairs on simplices of 2 to 5 outcomes."""
    rng = np.random.default_rng(7)
    pairs = []
    for _ in range(10_000):
        k = int(rng.integers(2, 6))
        pairs.append((rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))))
    return pairs


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--update-golden",
        action="store_true",
        default=False,
        help="rewrite the CLI snapshots in tests/golden/ from the current output",
    )


@pytest.fixture
def update_golden(request: pytest.FixtureRequest) -> bool:
    return bool(request.config.getoption("--update-golden"))
