import functools

import pytest

from dosquant.benchmarks import PLANTS
from dosquant.plant import discretize


@functools.lru_cache(maxsize=None)
def model_for(name, overrides=None):
    return discretize(PLANTS[name](), overrides=dict(overrides) if overrides else None)


@pytest.fixture(scope="session")
def models():
    return {name: model_for(name) for name in "ABC"}
