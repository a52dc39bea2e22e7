import math
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, Cost, add_costs, common_denominator
from src.errors import LpFailure, RewriteContextError, SignatureError
from src.lp import INFEASIBLE, OPTIMAL, LinearProgram, solve_lp
from src.valued import (
    EMPTY,
    EQUALITY,
    Atom,
    Instance,
    PowerDefinition,
    TauExpression,
    ValuedRelation,
    ValuedStructure,
    apply_clone_operator,
    check_expression,
    express,
)

logger = logging.getLogger(__name__)


@dataclass
class OptResult:
    cost: Cost
    witness: Optional[Tuple[int, ...]]
    nodes_explored: int

    def named_witness(self, expr: TauExpression, gamma: ValuedStructure) -> Optional[Dict[str, str]]:
        if self.witness is None:
            return None
        return {var: gamma.domain[a] for var, a in zip(expr.variables, self.witness)}


@dataclass
class BlpResult:
    bound: Cost
    marginals: Optional[Dict[str, List[Fraction]]]
    exact: bool = True


class _BranchAndBound:
    def __init__(self, expr: TauExpression, gamma: ValuedStructure):
        self.size = gamma.size
        self.n = len(expr.variables)
        self.summands: List[Tuple[ValuedRelation, Tuple[int, ...]]] = [
            (gamma.relation(atom.symbol), atom.args) for atom in expr.summands
        ]
        incident = [[] for _ in range(self.n)]  # type: List[List[int]]
        for number, (_, args) in enumerate(self.summands):
            for var in set(args):
                incident[var].append(number)
        self.incident = incident
        self.order = sorted(range(self.n), key=lambda v: (-len(incident[v]), v))
        self.assignment: List[int] = [-1] * self.n
        self.best: Cost = INF
        self.nodes = 0

    def _consistent_minimum(self, relation: ValuedRelation, args: Tuple[int, ...]) -> Cost:
        best: Cost = INF
        for t, value in relation.items():
            if value >= best:
                continue
            seen: Dict[int, int] = {}
            ok = True
            for var, a in zip(args, t):
                fixed = self.assignment[var]
                if fixed >= 0 and fixed != a:
                    ok = False
                    break
                if seen.setdefault(var, a) != a:
                    ok = False
                    break
            if ok:
                best = value
        return best

    def bound(self) -> Tuple[Cost, Dict[int, List[Cost]]]:
        """Lower bound and the aggregated unary cost vectors of summands with one open variable."""
        assigned: Cost = Fraction(0)
        rest: Cost = Fraction(0)
        unary: Dict[int, List[Cost]] = {}
        for relation, args in self.summands:
            open_vars = {v for v in args if self.assignment[v] < 0}
            if not open_vars:
                assigned = add_costs(assigned, relation(tuple(self.assignment[v] for v in args)))
            elif len(open_vars) == 1:
                var = next(iter(open_vars))
                vector = unary.setdefault(var, [Fraction(0)] * self.size)
                for a in range(self.size):
                    t = tuple(a if v == var else self.assignment[v] for v in args)
                    vector[a] = add_costs(vector[a], relation(t))
            else:
                rest = add_costs(rest, self._consistent_minimum(relation, args))
            if assigned == INF or rest == INF:
                return INF, unary
        total = add_costs(assigned, rest)
        for vector in unary.values():
            total = add_costs(total, min(vector))
        return total, unary

    def search(self, depth: int) -> None:
        self.nodes += 1
        lower, unary = self.bound()
        if lower >= self.best:
            return
        if depth == self.n:
            self.best = lower
            return
        var = self.order[depth]
        vector = unary.get(var)
        for a in range(self.size):
            if vector is not None and vector[a] == INF:
                continue
            self.assignment[var] = a
            self.search(depth + 1)
            self.assignment[var] = -1

    def reaches(self, target: Cost, depth: int = 0) -> bool:
        """Whether the fixed variables extend to an assignment of cost at most `target`."""
        self.nodes += 1
        lower, unary = self.bound()
        if lower > target:
            return False
        while depth < self.n and self.assignment[self.order[depth]] >= 0:
            depth += 1
        if depth == self.n:
            return True
        var = self.order[depth]
        vector = unary.get(var)
        for a in range(self.size):
            if vector is not None and vector[a] == INF:
                continue
            self.assignment[var] = a
            found = self.reaches(target, depth + 1)
            self.assignment[var] = -1
            if found:
                return True
        return False

    def least_optimum(self) -> Tuple[int, ...]:
        """Fixes variables in index order to the least element that keeps the optimum reachable."""
        for var in range(self.n):
            for a in range(self.size):
                self.assignment[var] = a
                if self.reaches(self.best):
                    break
                self.assignment[var] = -1
            assert self.assignment[var] >= 0, "the optimum must stay reachable"
        return tuple(self.assignment)


def solve_exact(expr: TauExpression, gamma: ValuedStructure) -> OptResult:
    check_expression(expr, gamma)
    if gamma.size == 0:
        return OptResult(INF if expr.summands else Fraction(0), None, 0)
    solver = _BranchAndBound(expr, gamma)
    solver.search(0)
    logger.debug("Branch and bound: %d nodes, cost %s", solver.nodes, solver.best)
    if solver.best == INF:
        return OptResult(INF, None, solver.nodes)
    witness = solver.least_optimum()
    return OptResult(solver.best, witness, solver.nodes)


def decide(instance: Instance, gamma: ValuedStructure) -> bool:
    return solve_exact(instance.expression, gamma).cost <= instance.threshold


def solve_blp(expr: TauExpression, gamma: ValuedStructure, config: SolverConfig = DEFAULT_CONFIG) -> BlpResult:
    check_expression(expr, gamma)
    size = gamma.size
    lp = LinearProgram(0)
    lam: Dict[Tuple[int, int], int] = {}
    for var in range(len(expr.variables)):
        for a in range(size):
            lam[(var, a)] = lp.add_variable()
        lp.add_equality({lam[(var, a)]: Fraction(1) for a in range(size)}, Fraction(1))

    for atom in expr.summands:
        relation = gamma.relation(atom.symbol)
        scope = sorted(set(atom.args))
        mu: Dict[Tuple[int, ...], int] = {}
        for t, value in relation.items():
            if value == INF:
                continue
            local = dict()  # type: Dict[int, int]
            if any(local.setdefault(var, a) != a for var, a in zip(atom.args, t)):
                continue
            key = tuple(local[v] for v in scope)
            mu[key] = lp.add_variable()
            lp.objective[mu[key]] = Fraction(value)
        if not mu:
            return BlpResult(INF, None)
        for position, var in enumerate(scope):
            for a in range(size):
                row = {column: Fraction(1) for key, column in mu.items() if key[position] == a}
                row[lam[(var, a)]] = Fraction(-1)
                lp.add_equality(row, Fraction(0))

    result = solve_lp(lp, config)
    if result.status == INFEASIBLE:
        return BlpResult(INF, None, result.exact)
    if result.status != OPTIMAL or result.x is None or result.value is None:
        raise LpFailure(f"BLP relaxation returned status {result.status}")
    marginals = {
        name: [result.x[lam[(var, a)]] for a in range(size)] for var, name in enumerate(expr.variables)
    }
    return BlpResult(result.value, marginals, result.exact)


@dataclass(frozen=True)
class RewriteContext:
    """
    Witnessing data for one instance rewriting.

    `gamma` is the structure the output instance is posed over. For the derived-symbol cases,
    `symbol` names the relation being eliminated and `source` the relation it is built from.
    """

    gamma: ValuedStructure
    symbol: Optional[str] = None
    source: Optional[str] = None
    definition: Optional[PowerDefinition] = None
    factor: Optional[Fraction] = None
    shift: Optional[Fraction] = None


REWRITE_CASES = ("equality", "empty", "expressibility", "scale_shift", "feas", "opt")


def _require(context: RewriteContext, *names: str) -> None:
    missing = [name for name in names if getattr(context, name) is None]
    if missing:
        raise RewriteContextError(f"Rewriting context lacks {', '.join(missing)}")
    if context.source is not None and context.source not in context.gamma.relations:
        raise RewriteContextError(f"Source relation {context.source} is not in the target structure")
    if context.symbol is not None and context.symbol in context.gamma.relations:
        raise RewriteContextError(f"Symbol {context.symbol} already belongs to the target structure")


def derived_structure(case: str, context: RewriteContext) -> ValuedStructure:
    """The structure the input instance of a rewriting is posed over."""
    gamma = context.gamma
    if case in ("equality", "empty"):
        return gamma
    _require(context, "symbol")
    assert context.symbol is not None
    if case == "expressibility":
        _require(context, "definition")
        assert context.definition is not None
        relation = express(gamma, context.definition.expression, context.definition.free)
        return gamma.with_relations({context.symbol: relation})
    _require(context, "source")
    source = gamma.relations[context.source]  # type: ignore
    if case == "scale_shift":
        _require(context, "factor", "shift")
        scaled = apply_clone_operator("scale", source, context.factor)
        return gamma.with_relations({context.symbol: apply_clone_operator("shift", scaled, context.shift)})
    if case in ("feas", "opt"):
        return gamma.with_relations({context.symbol: apply_clone_operator(case, source)})
    raise RewriteContextError(f"Unknown rewriting {case}")


def _rewrite_equality(instance: Instance) -> Instance:
    expr = instance.expression
    parent = list(range(len(expr.variables)))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for atom in expr.summands:
        if atom.symbol == EQUALITY:
            a, b = find(atom.args[0]), find(atom.args[1])
            parent[max(a, b)] = min(a, b)
    representatives = sorted({find(v) for v in range(len(expr.variables))})
    position = {r: i for i, r in enumerate(representatives)}
    summands = tuple(
        Atom(atom.symbol, tuple(position[find(v)] for v in atom.args))
        for atom in expr.summands
        if atom.symbol != EQUALITY
    )
    variables = tuple(expr.variables[r] for r in representatives)
    return Instance(TauExpression(variables, summands), instance.threshold)


def _rewrite_empty(instance: Instance, gamma: ValuedStructure) -> Instance:
    if not any(atom.symbol == EMPTY for atom in instance.expression.summands):
        return instance
    if not gamma.relations:
        raise RewriteContextError("The target structure has no relation to express an unsatisfiable instance")
    name = sorted(gamma.relations)[0]
    relation = gamma.relations[name]
    lowest = relation.min_finite()
    threshold = lowest - 1 if lowest is not None else Fraction(0)
    variables = tuple(f"x{i}" for i in range(relation.arity))
    return Instance(TauExpression(variables, (Atom(name, tuple(range(relation.arity))),)), threshold)


def _substitute(instance: Instance, symbol: str, definition: PowerDefinition) -> Instance:
    expr = instance.expression
    variables = list(expr.variables)
    summands: List[Atom] = []
    for number, atom in enumerate(expr.summands):
        if atom.symbol != symbol:
            summands.append(atom)
            continue
        inner = definition.expression
        mapping: Dict[int, int] = {}
        for position, var in enumerate(definition.free):
            mapping[var] = atom.args[position]
        for var in range(len(inner.variables)):
            if var not in mapping:
                variables.append(f"_{number}_{inner.variables[var]}")
                mapping[var] = len(variables) - 1
        summands.extend(Atom(a.symbol, tuple(mapping[v] for v in a.args)) for a in inner.summands)
    return Instance(TauExpression(tuple(variables), tuple(summands)), instance.threshold)


def _replace(
    expr: TauExpression, symbol: str, source: str, copies: int, tau_copies: int
) -> Tuple[TauExpression, int]:
    summands: List[Atom] = []
    k = 0
    for atom in expr.summands:
        if atom.symbol == symbol:
            k += 1
            summands.extend([Atom(source, atom.args)] * copies)
        else:
            summands.extend([atom] * tau_copies)
    return TauExpression(expr.variables, tuple(summands)), k


def _tau_relations(expr: TauExpression, gamma: ValuedStructure, symbol: str) -> List[ValuedRelation]:
    return [gamma.relation(atom.symbol) for atom in expr.summands if atom.symbol != symbol]


def rewrite_instance(instance: Instance, case: str, context: RewriteContext) -> Instance:
    """Rewrites an instance so that it has a solution iff the input has one."""
    gamma = context.gamma
    expr = instance.expression
    if case == "equality":
        return _rewrite_equality(instance)
    if case == "empty":
        return _rewrite_empty(instance, gamma)
    if case == "expressibility":
        _require(context, "symbol", "definition")
        assert context.definition is not None and context.symbol is not None
        if len(set(context.definition.free)) != len(context.definition.free):
            raise RewriteContextError("Free variables of a definition must be distinct")
        return _substitute(instance, context.symbol, context.definition)

    _require(context, "symbol", "source")
    symbol, source = context.symbol, context.source
    assert symbol is not None and source is not None
    relation = gamma.relations[source]
    if case == "scale_shift":
        _require(context, "factor", "shift")
        factor, shift = Fraction(context.factor), Fraction(context.shift)  # type: ignore
        if factor < 0:
            raise RewriteContextError(f"Scale factor must be non-negative, got {factor}")
        p, q = factor.numerator, factor.denominator
        rewritten, k = _replace(expr, symbol, source, p, q)
        return Instance(rewritten, q * (instance.threshold - k * shift))

    if case == "feas":
        k = sum(1 for atom in expr.summands if atom.symbol == symbol)
        highest = relation.max_finite()
        lowest = relation.min_finite()
        w = highest if highest is not None else Fraction(0)
        w_min = lowest if lowest is not None else Fraction(0)
        tau_costs = [v for r in _tau_relations(expr, gamma, symbol) for v in r.values]
        scale = common_denominator(tau_costs)
        gap = Fraction(math.floor(instance.threshold * scale) + 1, scale) - instance.threshold
        t = math.ceil(k * (w - min(Fraction(0), w_min)) / gap) + 1
        rewritten, _ = _replace(expr, symbol, source, 1, t)
        return Instance(rewritten, t * instance.threshold + k * w)

    if case == "opt":
        k = sum(1 for atom in expr.summands if atom.symbol == symbol)
        finite = sorted(set(v for v in relation.values if v != INF))
        if not finite:
            rewritten, _ = _replace(expr, symbol, source, 1, 1)
            return Instance(rewritten, instance.threshold)
        lowest = finite[0]
        copies = 1
        floor_values = [r.min_finite() for r in _tau_relations(expr, gamma, symbol)]
        if len(finite) > 1 and all(v is not None for v in floor_values):
            gap = finite[1] - finite[0]
            tau_floor = sum(floor_values, Fraction(0))  # type: ignore
            copies = max(1, math.floor((instance.threshold - tau_floor) / gap) + 1)
        rewritten, _ = _replace(expr, symbol, source, copies, 1)
        return Instance(rewritten, instance.threshold + copies * k * lowest)

    raise RewriteContextError(f"Unknown rewriting {case}")


def reduce_pp_instance(
    instance: Instance,
    gamma: ValuedStructure,
    d: int,
    definitions: Dict[str, PowerDefinition],
) -> Instance:
    """Turns an instance over a d-dimensional pp-power of gamma into an instance over gamma."""
    expr = instance.expression
    variables: List[str] = [f"{v}.{c}" for v in expr.variables for c in range(d)]
    summands: List[Atom] = []
    for number, atom in enumerate(expr.summands):
        if atom.symbol not in definitions:
            raise SignatureError(f"No defining expression for {atom.symbol}")
        definition = definitions[atom.symbol]
        if len(definition.free) != len(atom.args) * d:
            raise SignatureError(f"Definition of {atom.symbol} does not match arity {len(atom.args)} and d={d}")
        inner = definition.expression
        mapping: Dict[int, int] = {}
        for position, var in enumerate(definition.free):
            target = atom.args[position // d] * d + position % d
            if mapping.setdefault(var, target) != target:
                raise SignatureError(f"Definition of {atom.symbol} repeats a free variable")
        for var in range(len(inner.variables)):
            if var not in mapping:
                variables.append(f"_{number}_{inner.variables[var]}")
                mapping[var] = len(variables) - 1
        summands.extend(Atom(a.symbol, tuple(mapping[v] for v in a.args)) for a in inner.summands)
    return Instance(TauExpression(tuple(variables), tuple(summands)), instance.threshold)

