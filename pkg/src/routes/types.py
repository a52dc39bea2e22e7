import logging
from fractions import Fraction
from typing import Iterator, Optional

from src.bags import BagDatabase, TupleId, database_to_expression
from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF
from src.errors import PreconditionError, RouteError
from src.orbits import TYPE_SUFFIX, build_type_structure, default_m, reduce_to_type_instance
from src.queries import UnionQuery, analyze
from src.routes.base import ResilienceRoute, RouteAnswer, relevant_part
from src.solve import solve_exact
from src.valued import EXOGENOUS_SUFFIX, Instance

logger = logging.getLogger(__name__)


def _summand_ids(db: BagDatabase) -> Iterator[Optional[TupleId]]:
    """Tuple behind each summand of database_to_expression, None where removal is impossible."""
    for name, fact in db.tuple_ids():
        if (name, fact) in db.exogenous_tuples and name not in db.exogenous:
            yield None
            continue
        for _ in range(db.multiplicity((name, fact))):
            yield None if db.is_exogenous((name, fact)) else (name, fact)


@ResilienceRoute.register("types")
class OrbitTypeRoute(ResilienceRoute):
    def __init__(self, m: Optional[int] = None):
        self.m = m

    def check(self, mu: UnionQuery) -> None:
        for cq in mu.disjuncts:
            if not analyze(cq).gaifman_complete:
                raise RouteError(f"The types route needs Gaifman-complete disjuncts, got {cq}")

    def __call__(self, db: BagDatabase, mu: UnionQuery, config: SolverConfig = DEFAULT_CONFIG) -> RouteAnswer:
        self.check(mu)
        m = self.m if self.m is not None else default_m(mu)
        db = relevant_part(db, mu)
        try:
            types = build_type_structure(mu, sorted(db.exogenous), m, config)
        except PreconditionError as e:
            raise RouteError(str(e)) from e
        expr = database_to_expression(db, EXOGENOUS_SUFFIX)
        instance, gamma = reduce_to_type_instance(Instance(expr, Fraction(0)), types, config)
        result = solve_exact(instance.expression, gamma)
        logger.debug("Types route explored %d nodes over %d types", result.nodes_explored, types.size)
        if result.cost == INF or result.witness is None:
            return RouteAnswer(INF)
        removed = set()
        reads = [atom for atom in instance.expression.summands if atom.symbol.endswith(TYPE_SUFFIX)]
        for atom, tuple_id in zip(reads, _summand_ids(db)):
            if tuple_id is not None and gamma.relation(atom.symbol)((result.witness[atom.args[0]],)) != 0:
                removed.add(tuple_id)
        return RouteAnswer(result.cost, sorted(removed))
