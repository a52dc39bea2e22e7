import json
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, Cost, add_costs, format_cost, parse_cost, scale_cost
from src.elimination import minimize_terms
from src.errors import InputFormatError, PreconditionError, SignatureError
from src.queries import RelationalStructure, Signature

logger = logging.getLogger(__name__)

# built-in symbols available over every structure
EQUALITY = "_eq"
EMPTY = "_empty"
EXOGENOUS_SUFFIX = ":exo"


@dataclass(frozen=True)
class ValuedRelation:
    """Total cost table over size^arity tuples, flattened in lexicographic order."""

    arity: int
    size: int
    values: Tuple[Cost, ...]

    def __post_init__(self) -> None:
        assert len(self.values) == self.size**self.arity, "cost table must be total"

    @classmethod
    def from_function(cls, arity: int, size: int, function: Callable[[Tuple[int, ...]], Cost]) -> "ValuedRelation":
        return cls(arity, size, tuple(function(t) for t in itertools.product(range(size), repeat=arity)))

    @classmethod
    def constant(cls, arity: int, size: int, value: Cost) -> "ValuedRelation":
        return cls(arity, size, (value,) * (size**arity))

    def index(self, t: Sequence[int]) -> int:
        result = 0
        for a in t:
            result = result * self.size + a
        return result

    def __call__(self, t: Sequence[int]) -> Cost:
        assert len(t) == self.arity
        return self.values[self.index(t)]

    def tuples(self) -> Iterator[Tuple[int, ...]]:
        return itertools.product(range(self.size), repeat=self.arity)

    def items(self) -> Iterator[Tuple[Tuple[int, ...], Cost]]:
        return zip(self.tuples(), self.values)

    def finite_tuples(self) -> List[Tuple[int, ...]]:
        return [t for t, v in self.items() if v != INF]

    def min_finite(self) -> Optional[Fraction]:
        finite = [v for v in self.values if v != INF]
        return min(finite) if finite else None  # type: ignore

    def max_finite(self) -> Optional[Fraction]:
        finite = [v for v in self.values if v != INF]
        return max(finite) if finite else None  # type: ignore

    def is_crisp(self) -> bool:
        return all(v == 0 or v == INF for v in self.values)

    def restrict(self, elements: Sequence[int]) -> "ValuedRelation":
        return ValuedRelation.from_function(
            self.arity, len(elements), lambda t: self(tuple(elements[a] for a in t))
        )


@dataclass(frozen=True)
class ValuedStructure:
    domain: Tuple[str, ...]
    relations: Dict[str, ValuedRelation] = field(default_factory=dict)

    def __post_init__(self) -> None:
        assert len(set(self.domain)) == len(self.domain), "duplicate domain elements"
        for name, relation in self.relations.items():
            if relation.size != len(self.domain):
                raise SignatureError(f"Relation {name} is defined over a domain of size {relation.size}")

    @property
    def size(self) -> int:
        return len(self.domain)

    @property
    def signature(self) -> Signature:
        return Signature({name: r.arity for name, r in self.relations.items()})

    def relation(self, name: str) -> ValuedRelation:
        if name in self.relations:
            return self.relations[name]
        if name == EQUALITY:
            return ValuedRelation.from_function(2, self.size, lambda t: Fraction(0) if t[0] == t[1] else INF)
        if name == EMPTY:
            return ValuedRelation.constant(1, self.size, INF)
        raise SignatureError(f"Unknown relation {name}")

    def element_index(self, element: str) -> int:
        if element not in self.domain:
            raise InputFormatError(f"Unknown element {element}")
        return self.domain.index(element)

    def with_relations(self, extra: Dict[str, ValuedRelation]) -> "ValuedStructure":
        relations = dict(self.relations)
        relations.update(extra)
        return ValuedStructure(self.domain, relations)

    def restrict(self, elements: Sequence[int]) -> "ValuedStructure":
        return ValuedStructure(
            tuple(self.domain[e] for e in elements),
            {name: r.restrict(elements) for name, r in self.relations.items()},
        )


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: Tuple[int, ...]


@dataclass(frozen=True)
class TauExpression:
    variables: Tuple[str, ...]
    summands: Tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        for atom in self.summands:
            for index in atom.args:
                assert 0 <= index < len(self.variables), f"variable index {index} out of range"

    @classmethod
    def from_atoms(
        cls, atoms: Sequence[Tuple[str, Sequence[str]]], variables: Optional[Sequence[str]] = None
    ) -> "TauExpression":
        names: List[str] = list(variables) if variables is not None else []
        summands = []
        for symbol, args in atoms:
            for var in args:
                if var not in names:
                    if variables is not None:
                        raise InputFormatError(f"Undeclared variable {var}")
                    names.append(var)
            summands.append(Atom(symbol, tuple(names.index(v) for v in args)))
        return cls(tuple(names), tuple(summands))

    def variable_index(self, var: Union[int, str]) -> int:
        if isinstance(var, int):
            assert 0 <= var < len(self.variables)
            return var
        if var not in self.variables:
            raise InputFormatError(f"Unknown variable {var}")
        return self.variables.index(var)

    def __add__(self, other: "TauExpression") -> "TauExpression":
        """Sum over the union of the variables; shared names denote the same variable."""
        names = list(self.variables)
        for var in other.variables:
            if var not in names:
                names.append(var)
        moved = tuple(Atom(a.symbol, tuple(names.index(other.variables[i]) for i in a.args)) for a in other.summands)
        return TauExpression(tuple(names), self.summands + moved)

    def __str__(self) -> str:
        if not self.summands:
            return "0"
        return " + ".join(f"{a.symbol}({','.join(self.variables[i] for i in a.args)})" for a in self.summands)


@dataclass(frozen=True)
class Instance:
    expression: TauExpression
    threshold: Fraction

    def __post_init__(self) -> None:
        if self.threshold == INF:
            raise InputFormatError("Threshold must be finite")


@dataclass(frozen=True)
class PowerDefinition:
    arity: int
    expression: TauExpression
    free: Tuple[int, ...]


def check_expression(expr: TauExpression, gamma: ValuedStructure) -> None:
    for atom in expr.summands:
        relation = gamma.relation(atom.symbol)
        if relation.arity != len(atom.args):
            raise SignatureError(
                f"Atom {atom.symbol} has {len(atom.args)} arguments, relation arity is {relation.arity}"
            )


def evaluate(expr: TauExpression, gamma: ValuedStructure, assignment: Sequence[int]) -> Cost:
    assert len(assignment) == len(expr.variables), "assignment must be total"
    total: Cost = Fraction(0)
    for atom in expr.summands:
        total = add_costs(total, gamma.relation(atom.symbol)(tuple(assignment[i] for i in atom.args)))
        if total == INF:
            return INF
    return total


def apply_clone_operator(kind: str, relation: ValuedRelation, parameter: Optional[Fraction] = None) -> ValuedRelation:
    if kind == "feas":
        return ValuedRelation(
            relation.arity, relation.size, tuple(Fraction(0) if v != INF else INF for v in relation.values)
        )
    if kind == "opt":
        best = relation.min_finite()
        return ValuedRelation(
            relation.arity,
            relation.size,
            tuple(Fraction(0) if best is not None and v == best else INF for v in relation.values),
        )
    if kind == "shift":
        assert parameter is not None
        shift = Fraction(parameter)
        return ValuedRelation(relation.arity, relation.size, tuple(add_costs(v, shift) for v in relation.values))
    if kind == "scale":
        assert parameter is not None
        factor = Fraction(parameter)
        if factor < 0:
            raise PreconditionError(f"Scale factor must be non-negative, got {factor}")
        return ValuedRelation(relation.arity, relation.size, tuple(scale_cost(factor, v) for v in relation.values))
    raise PreconditionError(f"Unknown clone operator {kind}")


def express(
    gamma: ValuedStructure,
    expr: TauExpression,
    free: Sequence[Union[int, str]],
    fixed: Optional[Dict[Union[int, str], int]] = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> ValuedRelation:
    """
    The valued relation defined by `expr` with `free` as its coordinates: the minimum of the
    expression over all other variables. Variables in `fixed` are pinned to the given elements.
    """
    check_expression(expr, gamma)
    keep = [expr.variable_index(v) for v in free]
    pinned = {expr.variable_index(v): e for v, e in (fixed or {}).items()}
    terms = [(atom.args, gamma.relation(atom.symbol).values) for atom in expr.summands]
    table = minimize_terms(terms, len(expr.variables), gamma.size, keep, pinned, config.elimination_cell_cap)
    return ValuedRelation(len(keep), gamma.size, tuple(table.to_costs()))


def minimum(
    gamma: ValuedStructure,
    expr: TauExpression,
    fixed: Optional[Dict[Union[int, str], int]] = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> Cost:
    return express(gamma, expr, [], fixed, config).values[0]


def _tuple_name(elements: Sequence[str]) -> str:
    return "(" + ",".join(elements) + ")"


def pp_power(
    gamma: ValuedStructure,
    d: int,
    definitions: Dict[str, PowerDefinition],
    config: SolverConfig = DEFAULT_CONFIG,
) -> ValuedStructure:
    assert d >= 1
    if d == 1:
        domain = gamma.domain
    else:
        domain = tuple(_tuple_name(t) for t in itertools.product(gamma.domain, repeat=d))
    relations = {}
    for name, definition in definitions.items():
        if len(definition.free) != definition.arity * d:
            raise SignatureError(
                f"Definition of {name} has {len(definition.free)} free variables, expected {definition.arity * d}"
            )
        expressed = express(gamma, definition.expression, definition.free, config=config)
        # base-(n^d) digits of a k-tuple are exactly the base-n digits of its kd flattened coordinates
        relations[name] = ValuedRelation(definition.arity, gamma.size**d, expressed.values)
    return ValuedStructure(domain, relations)


def power_structure(gamma: ValuedStructure, ell: int) -> ValuedStructure:
    assert ell >= 1
    domain = tuple(_tuple_name(t) for t in itertools.product(gamma.domain, repeat=ell))
    points = list(itertools.product(range(gamma.size), repeat=ell))
    relations = {}
    for name, relation in gamma.relations.items():

        def averaged(t: Tuple[int, ...], relation: ValuedRelation = relation) -> Cost:
            slices = [relation(tuple(points[a][j] for a in t)) for j in range(ell)]
            return scale_cost(Fraction(1, ell), add_costs(*slices))

        relations[name] = ValuedRelation.from_function(relation.arity, len(points), averaged)
    return ValuedStructure(domain, relations)


def dual_to_valued(
    b: RelationalStructure,
    sigma: Sequence[str] = (),
    tuple_exogeneity: bool = False,
) -> ValuedStructure:
    for name in sigma:
        b.signature.arity(name)
    index = {e: i for i, e in enumerate(b.domain)}
    relations = {}
    for name in b.signature.names():
        members = {tuple(index[e] for e in t) for t in b.facts(name)}
        outside = INF if name in sigma else Fraction(1)
        relations[name] = ValuedRelation.from_function(
            b.signature.arity(name), len(b.domain), lambda t, m=members, o=outside: Fraction(0) if t in m else o
        )
        if tuple_exogeneity:
            relations[name + EXOGENOUS_SUFFIX] = ValuedRelation.from_function(
                b.signature.arity(name), len(b.domain), lambda t, m=members: Fraction(0) if t in m else INF
            )
    return ValuedStructure(tuple(b.domain), relations)


def automorphisms(gamma: ValuedStructure) -> List[Tuple[int, ...]]:
    result = []
    for permutation in itertools.permutations(range(gamma.size)):
        if all(
            relation(tuple(permutation[a] for a in t)) == value
            for relation in gamma.relations.values()
            for t, value in relation.items()
        ):
            result.append(permutation)
    return result


def structure_from_dict(content: Dict[str, Any]) -> ValuedStructure:
    if "domain" not in content or "relations" not in content:
        raise InputFormatError("Valued structure needs 'domain' and 'relations'")
    domain = tuple(str(e) for e in content["domain"])
    index = {e: i for i, e in enumerate(domain)}
    relations = {}
    for name, description in content["relations"].items():
        arity = int(description["arity"])
        if arity < 1:
            raise InputFormatError(f"Relation {name} must have positive arity")
        default = parse_cost(description["default"]) if "default" in description else None
        table: Dict[Tuple[int, ...], Cost] = {}
        for entry in description.get("entries", []):
            if len(entry) != 2:
                raise InputFormatError(f"Bad entry {entry} in {name}")
            raw, cost = entry
            if len(raw) != arity:
                raise InputFormatError(f"Tuple {raw} of {name} does not match arity {arity}")
            try:
                t = tuple(index[str(e)] for e in raw)
            except KeyError as e:
                raise InputFormatError(f"Tuple {raw} of {name} uses unknown element {e}") from None
            table[t] = parse_cost(cost)
        for t in itertools.product(range(len(domain)), repeat=arity):
            if t not in table:
                if default is None:
                    raise InputFormatError(f"Relation {name} has no cost for {t} and no default")
                table[t] = default
        relations[name] = ValuedRelation.from_function(arity, len(domain), table.__getitem__)
    return ValuedStructure(domain, relations)


def structure_to_dict(gamma: ValuedStructure) -> Dict[str, Any]:
    relations = {}
    for name, relation in gamma.relations.items():
        entries = [[[gamma.domain[a] for a in t], format_cost(v)] for t, v in relation.items()]
        relations[name] = {"arity": relation.arity, "entries": entries}
    return {"domain": list(gamma.domain), "relations": relations}


def load_valued_structure(path: str) -> ValuedStructure:
    with open(path, "r") as r:
        return structure_from_dict(json.load(r))


def instance_from_dict(content: Dict[str, Any]) -> Instance:
    if "summands" not in content:
        raise InputFormatError("Instance needs 'summands'")
    atoms = []
    for summand in content["summands"]:
        if len(summand) != 2 or not isinstance(summand[1], list):
            raise InputFormatError(f"Bad summand {summand}")
        atoms.append((str(summand[0]), [str(v) for v in summand[1]]))
    expression = TauExpression.from_atoms(atoms, content.get("variables"))
    threshold = parse_cost(content.get("threshold", 0))
    if threshold == INF:
        raise InputFormatError("Threshold must be finite")
    return Instance(expression, threshold)  # type: ignore


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    expr = instance.expression
    return {
        "variables": list(expr.variables),
        "summands": [[a.symbol, [expr.variables[i] for i in a.args]] for a in expr.summands],
        "threshold": format_cost(instance.threshold),
    }


def load_instance(path: str) -> Instance:
    with open(path, "r") as r:
        return instance_from_dict(json.load(r))
