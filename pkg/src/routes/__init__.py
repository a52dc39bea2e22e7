from src.routes.base import ResilienceRoute, RouteAnswer, relevant_part
from src.routes.hitting import HittingSetRoute
from src.routes.dual import DualRoute
from src.routes.types import OrbitTypeRoute

__all__ = ["ResilienceRoute", "RouteAnswer", "relevant_part", "HittingSetRoute", "DualRoute", "OrbitTypeRoute"]
