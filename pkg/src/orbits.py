import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple

from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF
from src.errors import CapExceededError, PreconditionError
from src.queries import RelationalStructure, UnionQuery, analyze, canonical_database, has_homomorphism
from src.valued import EXOGENOUS_SUFFIX, Atom, Instance, TauExpression, ValuedRelation, ValuedStructure

logger = logging.getLogger(__name__)

Pairs = Tuple[Tuple[int, int], ...]
ProjectionKey = Tuple[Tuple[int, ...], FrozenSet[Tuple[str, Tuple[int, ...]]]]

TYPE_SUFFIX = "*"


@dataclass(frozen=True)
class OrbitType:
    """Equality pattern of an m-tuple (block id per position) plus a query-free structure on the blocks."""

    pattern: Tuple[int, ...]
    facts: FrozenSet[Tuple[str, Tuple[int, ...]]]

    @property
    def blocks(self) -> int:
        return max(self.pattern) + 1

    def holds(self, name: str, blocks: Sequence[int]) -> bool:
        return (name, tuple(blocks)) in self.facts

    def structure(self, mu: UnionQuery) -> RelationalStructure:
        relations: Dict[str, set] = {name: set() for name in mu.signature.names()}
        for name, fact in self.facts:
            relations[name].add(tuple(str(b) for b in fact))
        domain = tuple(str(b) for b in range(self.blocks))
        return RelationalStructure(domain, {n: frozenset(f) for n, f in relations.items()}, mu.signature)

    def name(self) -> str:
        facts = ",".join(f"{n}({''.join(str(b) for b in t)})" for n, t in sorted(self.facts))
        return f"{''.join(str(b) for b in self.pattern)}[{facts}]"

    def projection(self, positions: Sequence[int]) -> ProjectionKey:
        relabel: Dict[int, int] = {}
        for p in positions:
            relabel.setdefault(self.pattern[p], len(relabel))
        pattern = tuple(relabel[self.pattern[p]] for p in positions)
        facts = frozenset(
            (name, tuple(relabel[b] for b in fact)) for name, fact in self.facts if all(b in relabel for b in fact)
        )
        return pattern, facts


def restricted_growth_strings(m: int) -> Iterator[Tuple[int, ...]]:
    """Set partitions of {0..m-1} in canonical lexicographic order."""

    def extend(prefix: List[int], blocks: int) -> Iterator[Tuple[int, ...]]:
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for b in range(blocks + 1):
            prefix.append(b)
            yield from extend(prefix, max(blocks, b + 1))
            prefix.pop()

    if m == 0:
        return
    yield from extend([0], 1)


def _check_query(mu: UnionQuery) -> None:
    for cq in mu.disjuncts:
        if not analyze(cq).gaifman_complete:
            raise PreconditionError("Orbit types need disjuncts with complete Gaifman graphs", witness=str(cq))


def _candidate_facts(mu: UnionQuery, blocks: int) -> List[Tuple[str, Tuple[int, ...]]]:
    return [
        (name, t)
        for name in mu.signature.names()
        for t in itertools.product(range(blocks), repeat=mu.signature.arity(name))
    ]


def default_m(mu: UnionQuery) -> int:
    return max(max(mu.signature.arities.values()), mu.max_variables(), 2)


def enumerate_orbit_types(mu: UnionQuery, m: int, config: SolverConfig = DEFAULT_CONFIG) -> List[OrbitType]:
    _check_query(mu)
    patterns = list(restricted_growth_strings(m))
    candidates = sum(2 ** len(_candidate_facts(mu, max(p) + 1)) for p in patterns)
    if candidates > config.type_candidate_cap:
        raise CapExceededError("type_candidate_cap", candidates, config.type_candidate_cap)
    canonical = [canonical_database(cq) for cq in mu.disjuncts]
    types: List[OrbitType] = []
    for pattern in patterns:
        facts = _candidate_facts(mu, max(pattern) + 1)
        for mask in range(2 ** len(facts)):
            chosen = frozenset(f for i, f in enumerate(facts) if mask >> i & 1)
            candidate = OrbitType(pattern, chosen)
            structure = candidate.structure(mu)
            if not any(has_homomorphism(c, structure) for c in canonical):
                types.append(candidate)
    logger.info("%d orbit types for m=%d out of %d candidates", len(types), m, candidates)
    return types


@dataclass
class TypeStructure:
    mu: UnionQuery
    sigma: FrozenSet[str]
    m: int
    types: List[OrbitType]
    relations: Dict[str, ValuedRelation] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.types)

    def compatible(self, pairs: Pairs, first: OrbitType, second: OrbitType) -> bool:
        return first.projection([a for a, _ in pairs]) == second.projection([b for _, b in pairs])

    def compatibility(self, pairs: Pairs) -> str:
        name = "C" + "".join(f"({a},{b})" for a, b in pairs)
        if name not in self.relations:
            left = [t.projection([a for a, _ in pairs]) for t in self.types]
            right = [t.projection([b for _, b in pairs]) for t in self.types]
            self.relations[name] = ValuedRelation.from_function(
                2, self.size, lambda t: Fraction(0) if left[t[0]] == right[t[1]] else INF
            )
        return name

    def equality(self, pairs: Pairs) -> str:
        name = "E" + "".join(f"({a},{b})" for a, b in pairs)
        if name not in self.relations:
            self.relations[name] = ValuedRelation.from_function(
                1,
                self.size,
                lambda t: Fraction(0) if all(self.types[t[0]].pattern[a] == self.types[t[0]].pattern[b] for a, b in pairs) else INF,
            )
        return name

    def valued_structure(self) -> ValuedStructure:
        return ValuedStructure(tuple(t.name() for t in self.types), dict(self.relations))


def build_type_structure(
    mu: UnionQuery, sigma: Sequence[str] = (), m: int = 2, config: SolverConfig = DEFAULT_CONFIG
) -> TypeStructure:
    max_arity = max(mu.signature.arities.values())
    if m < max_arity:
        raise PreconditionError(f"m={m} is below the maximum arity {max_arity}")
    types = enumerate_orbit_types(mu, m, config)
    result = TypeStructure(mu, frozenset(sigma), m, types)
    for name in mu.signature.names():
        arity = mu.signature.arity(name)
        outside = INF if name in sigma else Fraction(1)
        result.relations[name + TYPE_SUFFIX] = ValuedRelation.from_function(
            1,
            len(types),
            lambda t, name=name, arity=arity, o=outside: Fraction(0)
            if types[t[0]].holds(name, types[t[0]].pattern[:arity])
            else o,
        )
        result.relations[name + EXOGENOUS_SUFFIX + TYPE_SUFFIX] = ValuedRelation.from_function(
            1,
            len(types),
            lambda t, name=name, arity=arity: Fraction(0) if types[t[0]].holds(name, types[t[0]].pattern[:arity]) else INF,
        )
    return result


def reduce_to_type_instance(
    instance: Instance,
    types: TypeStructure,
    config: SolverConfig = DEFAULT_CONFIG,
) -> Tuple[Instance, ValuedStructure]:
    """
    One type variable per m-tuple of instance variables. Each summand reads its padded tuple's
    type; tuples sharing variables are tied together by compatibility constraints.
    """
    expr = instance.expression
    n = len(expr.variables)
    m = types.m
    count = n**m
    if count > config.type_variable_cap:
        raise CapExceededError("type_variable_cap", count, config.type_variable_cap)
    tuples = list(itertools.product(range(n), repeat=m))
    index = {t: i for i, t in enumerate(tuples)}
    names = tuple("y(" + ",".join(expr.variables[v] for v in t) + ")" for t in tuples)
    summands: List[Atom] = []

    for atom in expr.summands:
        args = atom.args + (atom.args[-1],) * (m - len(atom.args))
        if len(atom.args) > m:
            raise PreconditionError(f"Atom {atom.symbol} has arity above m={m}")
        summands.append(Atom(atom.symbol + TYPE_SUFFIX, (index[args],)))

    for i, t in enumerate(tuples):
        pairs = tuple((a, b) for a in range(m) for b in range(a + 1, m) if t[a] == t[b])
        if pairs:
            summands.append(Atom(types.equality(pairs), (i,)))
    for i, j in itertools.combinations(range(len(tuples)), 2):
        first, second = tuples[i], tuples[j]
        pairs = tuple((a, b) for a in range(m) for b in range(m) if first[a] == second[b])
        if pairs:
            summands.append(Atom(types.compatibility(pairs), (i, j)))

    logger.info("Type instance: %d variables, %d summands, %d types", count, len(summands), types.size)
    return Instance(TauExpression(names, tuple(summands)), instance.threshold), types.valued_structure()
