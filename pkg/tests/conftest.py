import os
import random

import pytest

from cli.loader import load_instance
from solver.price_arrangement import enumerate_candidates
from tests.helpers import random_market, tie_market, unit_market

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
COLA_DIR = os.path.join(ROOT, "data", "cola")


@pytest.fixture(scope="session")
def cola_dir():
    return COLA_DIR


@pytest.fixture(scope="session")
def cola_market():
    return load_instance(COLA_DIR)


@pytest.fixture(scope="session")
def cola_candidates(cola_market):
    return enumerate_candidates(cola_market)


@pytest.fixture
def unit():
    return unit_market()


@pytest.fixture
def tie():
    return tie_market()


@pytest.fixture
def market_factory():
    """Seeded random markets: factory(seed, n=None) draws n from 1..4 when omitted."""

    def factory(seed, n=None, m=2, taxed=None):
        rng = random.Random(seed)
        return random_market(rng, n if n is not None else rng.randint(1, 4), m, taxed=taxed)

    return factory
