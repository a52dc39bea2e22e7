import json
import logging
import sys
import traceback
from fractions import Fraction
from functools import wraps
from typing import Any, Callable, Dict, Optional

import fire  # type: ignore

from src.bags import BagDatabase, load_bag_database
from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, format_cost, parse_cost
from src.database import Database
from src.errors import InputFormatError, SolverError
from src.fractional import classify
from src.gadgets import Gadget
from src.presets import preset_dual, preset_query, preset_structure
from src.queries import RelationalStructure, UnionQuery, load_relational_structure, parse_union_query
from src.resilience import resilience_solve
from src.rpq import evaluate_rpq, parse_rpq, rpq_resilience
from src.solve import solve_blp, solve_exact
from src.valued import ValuedStructure, load_instance, load_valued_structure

logger = logging.getLogger(__name__)

PRESET_PREFIX = "preset:"
DUAL_ROUTE_PREFIX = "dual="


def report_errors(func: Callable[..., Dict[str, Any]]) -> Callable[..., None]:
    @wraps(func)
    def wrapped(self: Any, *args: Any, **kwargs: Any) -> None:
        try:
            result = func(self, *args, **kwargs)
        except SolverError as e:
            print(json.dumps({"error": type(e).__name__, "message": str(e)}, ensure_ascii=False))
            sys.exit(1)
        except Exception:
            traceback.print_exc()
            raise
        print(json.dumps(result, ensure_ascii=False, indent=2))

    return wrapped


def _threshold(value: Any) -> Optional[Fraction]:
    if value is None:
        return None
    threshold = parse_cost(str(value))
    if threshold == INF:
        raise InputFormatError("Threshold must be finite")
    return threshold  # type: ignore


def load_query(source: str) -> UnionQuery:
    if source.startswith(PRESET_PREFIX):
        return preset_query(source[len(PRESET_PREFIX) :])
    try:
        with open(source, "r") as r:
            return parse_union_query(r.read())
    except OSError as e:
        raise InputFormatError(f"Cannot read query file {source}: {e}") from e


def load_structure(source: str) -> ValuedStructure:
    if source.startswith(PRESET_PREFIX):
        return preset_structure(source[len(PRESET_PREFIX) :])
    return load_valued_structure(source)


def load_dual(source: str) -> RelationalStructure:
    if source.startswith(PRESET_PREFIX):
        return preset_dual(source[len(PRESET_PREFIX) :])
    return load_relational_structure(source)


class GadgetsCommand:
    def __init__(self, cli: "Cli"):
        self.cli = cli

    @report_errors
    def verify(self, name: str, model: Optional[str] = None) -> Dict[str, Any]:
        gadget = Gadget.by_name(name)()
        structure = load_relational_structure(model) if model else None
        report = gadget(structure, self.cli.config)
        result = report.to_dict()
        self.cli.record("gadgets", name, None, "passed" if report.passed else "failed", result, {"model": model})
        return result

    @report_errors
    def list(self) -> Dict[str, Any]:
        return {name: Gadget.by_name(name)().get_description() for name in Gadget.list_available()}


class Cli:
    def __init__(self, config_path: Optional[str] = None, db_path: Optional[str] = None):
        self.config = SolverConfig.load(config_path) if config_path else DEFAULT_CONFIG
        logging.basicConfig(
            level=getattr(logging, self.config.log_level.upper(), logging.INFO),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        self.runs = Database(db_path) if db_path else None
        self.gadgets = GadgetsCommand(self)

    def record(
        self,
        command: str,
        subject: Optional[str],
        route: Optional[str],
        value: Optional[str],
        result: Any,
        params: Dict[str, Any],
    ) -> None:
        if self.runs is None:
            return
        run_id = self.runs.save_run(command, subject, route, value, result, params)
        logger.info("Recorded run %d", run_id)

    @report_errors
    def solve(self, structure: str, instance: str, threshold: Any = None, blp: bool = True) -> Dict[str, Any]:
        gamma = load_structure(structure)
        problem = load_instance(instance)
        exact = solve_exact(problem.expression, gamma)
        result: Dict[str, Any] = {
            "cost": format_cost(exact.cost),
            "witness": exact.named_witness(problem.expression, gamma),
        }
        if blp:
            bound = solve_blp(problem.expression, gamma, self.config)
            result["blp_bound"] = format_cost(bound.bound)
        u = _threshold(threshold)
        if u is not None:
            result["decision"] = exact.cost <= u
        self.record("solve", instance, None, result["cost"], result, {"structure": structure, "threshold": threshold})
        return result

    @report_errors
    def classify(self, structure: str, arity: int = 2, siggers: bool = False) -> Dict[str, Any]:
        gamma = load_structure(structure)
        result = classify(gamma, arity, siggers, self.config).to_dict()
        self.record("classify", structure, None, result["cyclic_fpol"], result, {"arity": arity, "siggers": siggers})
        return result

    @report_errors
    def resilience(
        self,
        query: str,
        db: str,
        route: str = "auto",
        dual: Optional[str] = None,
        threshold: Any = None,
        m: Optional[int] = None,
        format: Optional[str] = None,
    ) -> Dict[str, Any]:
        mu = load_query(query)
        database: BagDatabase = load_bag_database(db, format)
        if route.startswith(DUAL_ROUTE_PREFIX):
            dual, route = route[len(DUAL_ROUTE_PREFIX) :], "dual"
        dual_structure = load_dual(dual) if dual else None
        answer = resilience_solve(database, mu, route, dual_structure, m, _threshold(threshold), self.config)
        result = answer.to_dict()
        params = {"db": db, "dual": dual, "threshold": threshold, "m": m}
        self.record("resilience", query, answer.route, result["resilience"], result, params)
        return result

    @report_errors
    def rpq(self, query: str, db: str, resilience: bool = False, format: Optional[str] = None) -> Dict[str, Any]:
        database = load_bag_database(db, format)
        q = parse_rpq(query)
        if resilience:
            answer = rpq_resilience(database, q)
            result = answer.to_dict()
            self.record("rpq", query, "lazy-hitting", result["resilience"], result, {"db": db})
            return result
        answers = sorted(evaluate_rpq(database, q))
        result = {"answers": [list(pair) for pair in answers]}
        self.record("rpq", query, None, str(len(answers)), result, {"db": db})
        return result


if __name__ == "__main__":
    fire.Fire(Cli)
