import random

import pytest

from src.bags import BagDatabase, database_from_dict
from src.presets import QUERY_TEXTS, preset_query
from src.queries import UnionQuery


def _bag(relations, exogenous=(), exogenous_tuples=None, elements=None) -> BagDatabase:
    content = {
        "relations": {name: [[list(fact), count] for fact, count in table.items()] for name, table in relations.items()},
        "exogenous": list(exogenous),
        "exogenous_tuples": exogenous_tuples or {},
    }
    if elements is not None:
        content["elements"] = list(elements)
    return database_from_dict(content)


@pytest.fixture
def bag():
    """Shorthand: bag({"R": {("a", "b"): 2}}, exogenous=["S"])."""
    return _bag


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0)


@pytest.fixture(params=sorted(QUERY_TEXTS))
def corpus_query(request) -> UnionQuery:
    return preset_query(request.param)


@pytest.fixture
def fin_dual_query() -> UnionQuery:
    return preset_query("fin-dual")


@pytest.fixture
def mu2() -> UnionQuery:
    return preset_query("mu2")
