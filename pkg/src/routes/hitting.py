from src.bags import BagDatabase
from src.config import DEFAULT_CONFIG, SolverConfig
from src.hitting import build_hitting_set, selection_ids, solve_hitting_set
from src.queries import UnionQuery
from src.routes.base import ResilienceRoute, RouteAnswer


@ResilienceRoute.register("hitting")
class HittingSetRoute(ResilienceRoute):
    def __call__(self, db: BagDatabase, mu: UnionQuery, config: SolverConfig = DEFAULT_CONFIG) -> RouteAnswer:
        instance = build_hitting_set(db, mu)
        result = solve_hitting_set(instance)
        return RouteAnswer(result.value, selection_ids(instance, result))
