import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from src.bags import BagDatabase, TupleId
from src.costs import INF, Cost
from src.queries import UnionQuery, canonical_database, enumerate_homomorphisms

logger = logging.getLogger(__name__)


@dataclass
class HittingSetInstance:
    vertices: Tuple[TupleId, ...]
    weights: Tuple[int, ...]
    edges: List[FrozenSet[int]] = field(default_factory=list)
    infeasible: bool = False

    def vertex_index(self, tuple_id: TupleId) -> int:
        return self.vertices.index(tuple_id)

    def add_edge(self, edge: FrozenSet[int]) -> bool:
        """Adds an edge unless a subset is already present; drops the supersets it makes redundant."""
        if not edge:
            self.infeasible = True
            return False
        if any(existing <= edge for existing in self.edges):
            return False
        self.edges = [existing for existing in self.edges if not edge <= existing]
        self.edges.append(edge)
        return True


@dataclass
class HittingSetResult:
    value: Cost
    selection: Tuple[int, ...]
    nodes_explored: int
    decision: Optional[bool] = None


def build_hitting_set(db: BagDatabase, mu: UnionQuery) -> HittingSetInstance:
    vertices = tuple(db.endogenous_ids())
    instance = HittingSetInstance(vertices, tuple(db.multiplicity(v) for v in vertices))
    index = {v: i for i, v in enumerate(vertices)}
    structure = db.structure(mu.signature)
    edges: Set[FrozenSet[int]] = set()
    for cq in mu.disjuncts:
        for h in enumerate_homomorphisms(canonical_database(cq), structure):
            image = {(atom.relation, tuple(h[cq.variables[i]] for i in atom.args)) for atom in cq.atoms}
            edge = frozenset(index[t] for t in image if not db.is_exogenous(t))
            if not edge:
                instance.infeasible = True
            edges.add(edge)
    for edge in sorted(edges, key=lambda e: (len(e), sorted(e))):
        instance.add_edge(edge)
    logger.debug("Hitting set: %d vertices, %d minimal edges", len(vertices), len(instance.edges))
    return instance


class _HittingSearch:
    def __init__(self, instance: HittingSetInstance):
        self.weights = instance.weights
        self.edges = sorted(instance.edges, key=lambda e: (len(e), sorted(e)))
        self.best: Cost = INF
        self.best_selection: Tuple[int, ...] = ()
        self.nodes = 0

    def packing_bound(self, uncovered: List[FrozenSet[int]], excluded: Set[int]) -> Cost:
        used: Set[int] = set()
        bound = 0
        for edge in uncovered:
            allowed = [v for v in edge if v not in excluded]
            if not allowed:
                return INF
            if edge & used:
                continue
            used |= edge
            bound += min(self.weights[v] for v in allowed)
        return bound

    def search(self, chosen: List[int], cost: int, excluded: Set[int]) -> None:
        self.nodes += 1
        chosen_set = set(chosen)
        uncovered = [e for e in self.edges if not e & chosen_set]
        if not uncovered:
            if cost < self.best:
                self.best = cost
                self.best_selection = tuple(sorted(chosen))
            return
        bound = self.packing_bound(uncovered, excluded)
        if bound == INF or cost + bound >= self.best:
            return
        branch = [v for v in sorted(uncovered[0]) if v not in excluded]
        for position, vertex in enumerate(branch):
            chosen.append(vertex)
            self.search(chosen, cost + self.weights[vertex], excluded | set(branch[:position]))
            chosen.pop()


def solve_hitting_set(instance: HittingSetInstance, u: Optional[Fraction] = None) -> HittingSetResult:
    if instance.infeasible:
        return HittingSetResult(INF, (), 0, None if u is None else False)
    search = _HittingSearch(instance)
    search.search([], 0, set())
    value: Cost = Fraction(search.best) if search.best != INF else INF
    decision = None if u is None else value <= u
    logger.debug("Hitting set optimum %s after %d nodes", value, search.nodes)
    return HittingSetResult(value, search.best_selection, search.nodes, decision)


def selection_ids(instance: HittingSetInstance, result: HittingSetResult) -> List[TupleId]:
    return [instance.vertices[v] for v in result.selection]


def selection_weights(instance: HittingSetInstance, result: HittingSetResult) -> Dict[TupleId, int]:
    return {instance.vertices[v]: instance.weights[v] for v in result.selection}
