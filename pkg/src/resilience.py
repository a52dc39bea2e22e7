import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from src.bags import BagDatabase, TupleId
from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, Cost, format_cost
from src.errors import CapExceededError, RouteError
from src.queries import (
    ConjunctiveQuery,
    RelationalStructure,
    UnionQuery,
    components,
    has_homomorphism,
    implies,
    satisfies,
)
from src.routes import ResilienceRoute, RouteAnswer

logger = logging.getLogger(__name__)


@dataclass
class ResilienceResult:
    value: Cost
    removed: List[Tuple[TupleId, int]] = field(default_factory=list)
    route: str = "hitting"
    decision: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "resilience": format_cost(self.value),
            "removed": [{"rel": name, "tuple": list(fact), "mult": mult} for (name, fact), mult in self.removed],
            "route": self.route,
        }
        if self.decision is not None:
            result["decision"] = self.decision
        return result


def align(db: BagDatabase, mu: UnionQuery) -> BagDatabase:
    """Database over the union of both signatures with the query's exogenous relations added."""
    return BagDatabase(
        db.signature.merge(mu.signature),
        db.domain,
        db.relations,
        db.exogenous | mu.exogenous,
        db.exogenous_tuples,
    )


def _drop_implied(parts: List[ConjunctiveQuery], forward: bool) -> List[ConjunctiveQuery]:
    # forward: drop parts that imply another part (disjuncts); otherwise drop parts implied by another (components)
    kept = []
    for i, part in enumerate(parts):
        redundant = False
        for j, other in enumerate(parts):
            if i == j:
                continue
            covered = implies(part, other) if forward else implies(other, part)
            mutual = implies(other, part) if forward else implies(part, other)
            if covered and (not mutual or j < i):
                redundant = True
                break
        if not redundant:
            kept.append(part)
    return kept


def simplify_query(mu: UnionQuery) -> List[List[ConjunctiveQuery]]:
    """Irredundant disjuncts, each split into its irredundant connected components."""
    disjuncts = _drop_implied(list(mu.disjuncts), forward=True)
    return [_drop_implied(components(cq), forward=False) for cq in disjuncts]


def component_choices(mu: UnionQuery, config: SolverConfig = DEFAULT_CONFIG) -> Optional[List[UnionQuery]]:
    """
    The query is false iff some choice of one component per disjunct is entirely false, so the
    resilience of mu is the minimum over these unions of connected queries.
    """
    parts = simplify_query(mu)
    count = 1
    for options in parts:
        count *= len(options)
    if count > config.component_choice_cap:
        logger.info("Skipping component split: %d choices over cap %d", count, config.component_choice_cap)
        return None
    return [UnionQuery(mu.signature, tuple(choice), mu.exogenous) for choice in itertools.product(*parts)]


def _route_kwargs(name: str, dual: Optional[RelationalStructure], m: Optional[int]) -> Dict[str, Any]:
    if name == "dual":
        return {"dual": dual}
    if name == "types":
        return {"m": m}
    return {}


def _removed_with_multiplicity(db: BagDatabase, removed: List[TupleId]) -> List[Tuple[TupleId, int]]:
    return [(t, db.multiplicity(t)) for t in sorted(set(removed))]


def _best_answer(answers: List[RouteAnswer]) -> RouteAnswer:
    best = answers[0]
    for answer in answers[1:]:
        if answer.value < best.value:
            best = answer
    return best


def resilience_solve(
    db: BagDatabase,
    mu: UnionQuery,
    route: str = "auto",
    dual: Optional[RelationalStructure] = None,
    m: Optional[int] = None,
    threshold: Optional[Fraction] = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> ResilienceResult:
    db = align(db, mu)
    name = route
    if route == "auto":
        name = "dual" if dual is not None else "hitting"
    solver: ResilienceRoute = ResilienceRoute.by_name(name)(**_route_kwargs(name, dual, m))
    logger.info("Resilience via %s route over %d tuples", name, len(db.tuple_ids()))

    choices = component_choices(mu, config) if solver.splits_components else None
    for q in choices or [mu]:
        solver.check(q)
    if not satisfies(db.structure(mu.signature), mu):
        return ResilienceResult(Fraction(0), [], name, None if threshold is None else True)

    if choices is None:
        answer = solver(db, mu, config)
    else:
        answer = _best_answer([solver(db, q, config) for q in choices])

    removed = _removed_with_multiplicity(db, answer.removed)
    if answer.value == INF:
        removed = []
        if not satisfies(db.without(db.endogenous_ids()).structure(mu.signature), mu):
            raise RouteError(f"{name} route reports inf but removing every endogenous tuple falsifies the query")
    else:
        if sum(mult for _, mult in removed) != answer.value:
            raise RouteError(f"{name} removal does not match its cost {format_cost(answer.value)}")
        residual = db.without([t for t, _ in removed]).structure(mu.signature)
        if satisfies(residual, mu):
            raise RouteError(f"{name} removal leaves the query true")
    decision = None if threshold is None else answer.value <= threshold
    return ResilienceResult(answer.value, removed, name, decision)


def brute_force_removal(
    db: BagDatabase, mu: UnionQuery, config: SolverConfig = DEFAULT_CONFIG
) -> Tuple[Cost, List[TupleId]]:
    db = align(db, mu)
    candidates = [t for t in db.endogenous_ids() if t[0] in mu.signature]
    weight = sum(db.multiplicity(t) for t in candidates)
    if weight > config.brute_force_cap:
        raise CapExceededError("brute_force_cap", weight, config.brute_force_cap)
    if not satisfies(db.structure(mu.signature), mu):
        return Fraction(0), []
    if satisfies(db.without(candidates).structure(mu.signature), mu):
        return INF, []

    weights = sorted(db.multiplicity(t) for t in candidates)
    best: Cost = INF
    best_removal: List[TupleId] = []
    for size in range(1, len(candidates) + 1):
        if sum(weights[:size]) >= best:
            break
        for subset in itertools.combinations(candidates, size):
            cost = sum(db.multiplicity(t) for t in subset)
            if cost >= best:
                continue
            if not satisfies(db.without(subset).structure(mu.signature), mu):
                best, best_removal = cost, list(subset)
    return Fraction(best), sorted(best_removal)


def brute_force_resilience(db: BagDatabase, mu: UnionQuery, config: SolverConfig = DEFAULT_CONFIG) -> Cost:
    return brute_force_removal(db, mu, config)[0]


def find_removal(
    db: BagDatabase, mu: UnionQuery, u: Fraction, config: SolverConfig = DEFAULT_CONFIG
) -> Optional[List[TupleId]]:
    """Builds a removal of cost at most u from decision answers alone, or None if there is none."""
    db = align(db, mu)
    if resilience_solve(db, mu, "hitting", config=config).value > u:
        return None
    removal: List[TupleId] = []
    budget = u
    while satisfies(db.structure(mu.signature), mu):
        for t in db.endogenous_ids():
            mult = db.multiplicity(t)
            if mult > budget:
                continue
            rest = db.without([t])
            if resilience_solve(rest, mu, "hitting", config=config).value <= budget - mult:
                removal.append(t)
                budget -= mult
                db = rest
                break
        else:
            raise AssertionError("No tuple keeps the residual answer positive")
    return sorted(removal)


@dataclass
class DualCheck:
    checked: int
    counterexample: Optional[RelationalStructure] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def _structure_from_mask(
    mu: UnionQuery, domain: Tuple[str, ...], facts: List[Tuple[str, Tuple[str, ...]]], chosen: List[bool]
) -> RelationalStructure:
    relations: Dict[str, set] = {name: set() for name in mu.signature.names()}
    for (name, fact), keep in zip(facts, chosen):
        if keep:
            relations[name].add(fact)
    return RelationalStructure(domain, {n: frozenset(f) for n, f in relations.items()}, mu.signature)


def verify_dual(
    mu: UnionQuery,
    b: RelationalStructure,
    max_elements: int = 4,
    samples: int = 200,
    seed: int = 0,
    exhaustive_facts: int = 18,
) -> DualCheck:
    """
    Checks that a structure maps to b exactly when it does not satisfy mu.

    A domain size is checked exhaustively while its possible facts number at most
    `exhaustive_facts`, and by `samples` seeded random structures beyond that.
    """
    rng = random.Random(seed)
    checked = 0
    for n in range(1, max_elements + 1):
        domain = tuple(str(i) for i in range(n))
        facts = [
            (name, t)
            for name in mu.signature.names()
            for t in itertools.product(domain, repeat=mu.signature.arity(name))
        ]
        if len(facts) <= exhaustive_facts:
            masks = (list(bits) for bits in itertools.product([False, True], repeat=len(facts)))
        else:
            masks = ([rng.random() < 0.5 for _ in facts] for _ in range(samples))
        for chosen in masks:
            structure = _structure_from_mask(mu, domain, facts, chosen)
            checked += 1
            if has_homomorphism(structure, b) == satisfies(structure, mu):
                return DualCheck(checked, structure)
    return DualCheck(checked)
