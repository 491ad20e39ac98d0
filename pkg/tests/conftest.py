from pathlib import Path

import pytest

from entp.model import Ensemble, FailureRecord, StrictRanking

FIXTURES = Path(__file__).parent / "fixtures"
RUNNING = FIXTURES / "running_example"

# the five change-traversing tests, renumbered densely in name order
IDS = {1: 0, 3: 1, 5: 2, 7: 3, 9: 4}


def tr(*numbers):
    """Running-example test numbers (t1, t3, ...) -> dense ids."""
    return [IDS[x] for x in numbers]


P1 = tr(3, 1, 5, 9, 7)
P2 = tr(5, 9, 3, 7, 1)
P3 = tr(7, 1, 5, 3, 9)
FAILED = tr(3, 5, 7)


@pytest.fixture
def running_ensemble():
    return Ensemble.from_orders([P1, P2, P3], labels=["p1", "p2", "p3"])


@pytest.fixture
def running_profile():
    """The top-2 diverse selection, {p2, p3}."""
    return Ensemble.from_orders([P2, P3], labels=["p2", "p3"])


@pytest.fixture
def running_failures():
    return FailureRecord(FAILED)


@pytest.fixture
def running_dir():
    return RUNNING


def strict(*order):
    return StrictRanking(order)
