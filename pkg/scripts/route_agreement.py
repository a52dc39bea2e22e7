import random
from typing import Dict, List

import fire
from tqdm import tqdm

from src.bags import random_bag_database
from src.costs import format_cost
from src.database import Database
from src.errors import CapExceededError
from src.presets import QUERY_TEXTS, preset_dual, preset_query
from src.resilience import brute_force_resilience, resilience_solve

DUALS = {"fin-dual": "fin-dual"}
TYPE_QUERIES = ("mu2", "mu1")


def routes_for(name: str) -> List[str]:
    routes = ["hitting"]
    if name in DUALS:
        routes.append("dual")
    if name in TYPE_QUERIES:
        routes.append("types")
    return routes


def main(
    db_path: str,
    samples: int = 500,
    elements: int = 3,
    total: int = 5,
    seed: int = 0,
    queries: str = ",".join(QUERY_TEXTS),
):
    runs = Database(db_path)
    rng = random.Random(seed)
    mismatches: Dict[str, int] = {}
    for name in queries.split(","):
        mu = preset_query(name)
        dual = preset_dual(DUALS[name]) if name in DUALS else None
        for _ in tqdm(range(samples), desc=name):
            db = random_bag_database(mu.signature, rng, elements, total)
            expected = brute_force_resilience(db, mu)
            for route in routes_for(name):
                try:
                    value = resilience_solve(db, mu, route, dual=dual).value
                except CapExceededError as e:
                    runs.save_run("route_agreement", name, route, "cap", {"error": str(e)}, db.to_dict())
                    continue
                agree = value == expected
                if not agree:
                    mismatches[f"{name}/{route}"] = mismatches.get(f"{name}/{route}", 0) + 1
                result = {"value": format_cost(value), "oracle": format_cost(expected), "agree": agree}
                runs.save_run("route_agreement", name, route, format_cost(value), result, db.to_dict())
    print(mismatches if mismatches else "All routes agree with the oracle")


if __name__ == "__main__":
    fire.Fire(main)
