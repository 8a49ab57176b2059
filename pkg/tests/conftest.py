from functools import lru_cache

import pytest

from rspin.correlators import Engine


@lru_cache(maxsize=None)
def engine(r, max_n=6, max_d=2):
    return Engine(r, max_n, max_d)


@pytest.fixture
def get_engine():
    return engine
