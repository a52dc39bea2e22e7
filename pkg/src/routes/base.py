from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List

from src.bags import BagDatabase, TupleId
from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import Cost
from src.queries import UnionQuery
from src.registrable import Registrable


@dataclass
class RouteAnswer:
    value: Cost
    removed: List[TupleId] = field(default_factory=list)


class ResilienceRoute(ABC, Registrable):
    # connectivity preprocessing rewrites the query, which only routes built from the query itself allow
    splits_components: bool = True

    @abstractmethod
    def __call__(self, db: BagDatabase, mu: UnionQuery, config: SolverConfig = DEFAULT_CONFIG) -> RouteAnswer:
        raise NotImplementedError()

    def check(self, mu: UnionQuery) -> None:
        pass


def relevant_part(db: BagDatabase, mu: UnionQuery) -> BagDatabase:
    """Tuples of the query's relations only, over the elements they use."""
    relations = {name: table for name, table in db.relations.items() if name in mu.signature and table}
    used = {e for table in relations.values() for fact in table for e in fact}
    return BagDatabase(
        db.signature.merge(mu.signature),
        tuple(e for e in db.domain if e in used),
        relations,
        frozenset(name for name in db.exogenous if name in mu.signature),
        frozenset(t for t in db.exogenous_tuples if t[0] in mu.signature),
    )
