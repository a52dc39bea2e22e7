import logging
from typing import Optional

from src.bags import BagDatabase, database_to_expression
from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF
from src.errors import RouteError
from src.queries import RelationalStructure, UnionQuery
from src.routes.base import ResilienceRoute, RouteAnswer, relevant_part
from src.solve import solve_exact
from src.valued import EXOGENOUS_SUFFIX, dual_to_valued

logger = logging.getLogger(__name__)


@ResilienceRoute.register("dual")
class DualRoute(ResilienceRoute):
    splits_components = False

    def __init__(self, dual: Optional[RelationalStructure] = None):
        if dual is None:
            raise RouteError("The dual route needs a dual structure")
        self.dual = dual

    def check(self, mu: UnionQuery) -> None:
        missing = [name for name in mu.signature.names() if name not in self.dual.signature]
        if missing:
            raise RouteError(f"Dual structure lacks relations {missing}")

    def __call__(self, db: BagDatabase, mu: UnionQuery, config: SolverConfig = DEFAULT_CONFIG) -> RouteAnswer:
        self.check(mu)
        db = relevant_part(db, mu)
        gamma = dual_to_valued(self.dual, sorted(db.exogenous), tuple_exogeneity=True)
        expr = database_to_expression(db, EXOGENOUS_SUFFIX)
        result = solve_exact(expr, gamma)
        logger.debug("Dual route explored %d nodes", result.nodes_explored)
        if result.cost == INF or result.witness is None:
            return RouteAnswer(INF)
        removed = []
        for name, fact in db.endogenous_ids():
            image = tuple(result.witness[expr.variables.index(e)] for e in fact)
            if gamma.relation(name)(image) != 0:
                removed.append((name, fact))
        return RouteAnswer(result.cost, removed)
