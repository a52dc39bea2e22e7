import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, common_denominator
from src.errors import CapExceededError, LpFailure, PreconditionError
from src.lp import INFEASIBLE, OPTIMAL, solve_array_lp
from src.valued import ValuedRelation, ValuedStructure

logger = logging.getLogger(__name__)

Family = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class OperationTable:
    """An ell-ary operation on {0..size-1}, values listed over size^ell in lexicographic order."""

    arity: int
    size: int
    values: Tuple[int, ...]

    def __post_init__(self) -> None:
        assert len(self.values) == self.size**self.arity, "operation table must be total"
        assert all(0 <= v < self.size for v in self.values)

    def __call__(self, *args: int) -> int:
        index = 0
        for a in args:
            index = index * self.size + a
        return self.values[index]

    def image(self) -> List[int]:
        return sorted(set(self.values))


@dataclass(frozen=True)
class FractionalOperation:
    arity: int
    support: Dict[OperationTable, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        assert self.support, "a fractional operation needs a non-empty support"
        for op, weight in self.support.items():
            assert op.arity == self.arity
            assert weight > 0, "support weights must be positive"
        if sum(self.support.values(), Fraction(0)) != 1:
            raise PreconditionError("Weights of a fractional operation must sum to 1")


def operation_from_function(arity: int, size: int, function) -> OperationTable:  # type: ignore
    return OperationTable(arity, size, tuple(function(*t) for t in itertools.product(range(size), repeat=arity)))


def projection(ell: int, i: int, size: int) -> OperationTable:
    return operation_from_function(ell, size, lambda *t: t[i])


def min_operation(size: int) -> OperationTable:
    return operation_from_function(2, size, min)


def max_operation(size: int) -> OperationTable:
    return operation_from_function(2, size, max)


def uniform_projections(ell: int, size: int) -> FractionalOperation:
    return FractionalOperation(ell, {projection(ell, i, size): Fraction(1, ell) for i in range(ell)})


def is_cyclic(op: OperationTable) -> bool:
    return all(
        op(*t) == op(*(t[1:] + t[:1])) for t in itertools.product(range(op.size), repeat=op.arity)
    )


def is_siggers(op: OperationTable) -> bool:
    if op.arity != 4:
        return False
    return all(op(a, r, e, a) == op(r, a, r, e) for a, r, e in itertools.product(range(op.size), repeat=3))


def _scaled_array(relation: ValuedRelation) -> Tuple[np.ndarray, int]:
    scale = common_denominator(relation.values)
    values = [INF if v == INF else int(v * scale) for v in relation.values]
    return np.array(values, dtype=object).reshape((relation.size,) * relation.arity), scale


def _families(size: int, arity: int, ell: int) -> np.ndarray:
    """All ell-tuples of arity-tuples, shape (count, ell, arity)."""
    tuples = list(itertools.product(range(size), repeat=arity))
    return np.array(list(itertools.product(tuples, repeat=ell)), dtype=np.int64).reshape(-1, ell, arity)


def _columns(families: np.ndarray, size: int) -> np.ndarray:
    """Point index in size^ell of each coordinate column, shape (count, arity)."""
    ell = families.shape[1]
    index = np.zeros((families.shape[0], families.shape[2]), dtype=np.int64)
    for j in range(ell):
        index = index * size + families[:, j, :]
    return index


def improvement_violation(omega: FractionalOperation, relation: ValuedRelation) -> Optional[Family]:
    ell = omega.arity
    table, _ = _scaled_array(relation)
    families = _families(relation.size, relation.arity, ell)
    columns = _columns(families, relation.size)
    weight_scale = common_denominator(omega.support.values())
    rhs = np.zeros(families.shape[0], dtype=object)
    for j in range(ell):
        rhs = rhs + table[tuple(families[:, j, i] for i in range(relation.arity))]
    rhs = rhs * weight_scale
    lhs = np.zeros(families.shape[0], dtype=object)
    for op, weight in omega.support.items():
        values = np.array(op.values, dtype=np.int64)
        image = values[columns]
        lhs = lhs + int(weight * weight_scale) * table[tuple(image[:, i] for i in range(relation.arity))]
    lhs = lhs * ell
    bad = np.nonzero(~(lhs <= rhs).astype(bool))[0]
    if len(bad) == 0:
        return None
    return tuple(tuple(int(a) for a in row) for row in families[bad[0]])


def improves(omega: FractionalOperation, relation: ValuedRelation) -> bool:
    assert omega.support and next(iter(omega.support)).size == relation.size, "domains must match"
    return improvement_violation(omega, relation) is None


def fractional_polymorphism_violation(
    omega: FractionalOperation, gamma: ValuedStructure
) -> Optional[Tuple[str, Family]]:
    for name in sorted(gamma.relations):
        family = improvement_violation(omega, gamma.relations[name])
        if family is not None:
            return name, family
    return None


def is_fractional_polymorphism(omega: FractionalOperation, gamma: ValuedStructure) -> bool:
    return fractional_polymorphism_violation(omega, gamma) is None


def _improvement_rows(
    gamma: ValuedStructure, ell: int, operations: np.ndarray
) -> Tuple[List[np.ndarray], List[int], np.ndarray]:
    """
    Improvement inequalities over candidate operations given by their value columns
    (shape size^ell x candidates). Returns the rows, their right-hand sides and the mask
    of candidates that never send a finite family to an infinite tuple.
    """
    allowed = np.ones(operations.shape[1], dtype=bool)
    rows: List[np.ndarray] = []
    rhs_values: List[int] = []
    for name in sorted(gamma.relations):
        relation = gamma.relations[name]
        table, _ = _scaled_array(relation)
        finite = np.vectorize(lambda v: v != INF, otypes=[bool])(table)
        scaled = np.where(finite, table, 0).astype(np.int64)
        families = _families(gamma.size, relation.arity, ell)
        columns = _columns(families, gamma.size)
        seen = set()
        for number in range(families.shape[0]):
            family = families[number]
            right = [table[tuple(family[j])] for j in range(ell)]
            if any(v == INF for v in right):
                continue
            image = tuple(operations[columns[number, i]] for i in range(relation.arity))
            allowed &= finite[image]
            key = (tuple(columns[number]), sum(right))
            if key in seen:
                continue
            seen.add(key)
            rows.append(ell * scaled[image])
            rhs_values.append(int(sum(right)))
    return rows, rhs_values, allowed


def _solve_weights(
    gamma: ValuedStructure,
    ell: int,
    operations: np.ndarray,
    objective: Optional[np.ndarray],
    config: SolverConfig,
) -> Tuple[Optional[Dict[int, Fraction]], Optional[Fraction]]:
    rows, rhs, allowed = _improvement_rows(gamma, ell, operations)
    candidates = np.nonzero(allowed)[0]
    if len(candidates) == 0:
        return None, None
    c = np.zeros(len(candidates)) if objective is None else -objective[candidates].astype(np.float64)
    a_ub = np.array([row[candidates] for row in rows], dtype=np.float64) if rows else None
    b_ub = np.array(rhs, dtype=np.float64) if rows else None
    a_eq = np.ones((1, len(candidates)))
    b_eq = np.ones(1)
    logger.info("Fractional polymorphism LP: %d operations, %d inequalities", len(candidates), len(rows))
    result = solve_array_lp(c, a_ub, b_ub, a_eq, b_eq, config)
    if result.status == INFEASIBLE:
        return None, None
    if result.status != OPTIMAL or result.x is None or result.value is None:
        raise LpFailure(f"Fractional polymorphism LP returned status {result.status}")
    weights = {int(candidates[j]): v for j, v in enumerate(result.x) if v > 0}
    return weights, -result.value


def _to_fractional(ell: int, size: int, operations: np.ndarray, weights: Dict[int, Fraction]) -> FractionalOperation:
    support = {}
    for column, weight in weights.items():
        op = OperationTable(ell, size, tuple(int(v) for v in operations[:, column]))
        support[op] = support.get(op, Fraction(0)) + weight
    return FractionalOperation(ell, support)


def _check_cap(count: int, config: SolverConfig) -> None:
    if count > config.operation_cap:
        raise CapExceededError("operation_cap", count, config.operation_cap)


def cyclic_operations(size: int, ell: int, config: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Value columns of all cyclic ell-ary operations, one per choice of value on each rotation orbit."""
    points = list(itertools.product(range(size), repeat=ell))
    index = {p: i for i, p in enumerate(points)}
    orbit_of = [-1] * len(points)
    orbits = 0
    for p in points:
        if orbit_of[index[p]] >= 0:
            continue
        for shift in range(ell):
            orbit_of[index[p[shift:] + p[:shift]]] = orbits
        orbits += 1
    count = size**orbits
    _check_cap(count, config)
    tables = np.arange(count, dtype=np.int64)
    digits = np.stack([(tables // size**o) % size for o in range(orbits)]) if orbits else np.zeros((0, 1))
    return digits[np.array(orbit_of)]


def all_operations(size: int, ell: int, config: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    points = size**ell
    count = size**points
    _check_cap(count, config)
    tables = np.arange(count, dtype=np.int64)
    return np.stack([(tables // size**p) % size for p in range(points)])


def find_cyclic_fpol(
    gamma: ValuedStructure, ell: int, config: SolverConfig = DEFAULT_CONFIG
) -> Optional[FractionalOperation]:
    assert ell >= 2
    operations = cyclic_operations(gamma.size, ell, config)
    weights, _ = _solve_weights(gamma, ell, operations, None, config)
    if weights is None:
        logger.info("No cyclic fractional polymorphism of arity %d", ell)
        return None
    omega = _to_fractional(ell, gamma.size, operations, weights)
    violation = fractional_polymorphism_violation(omega, gamma)
    if violation is not None:
        raise LpFailure(f"LP weights fail the exact improvement check at {violation}")
    return omega


def siggers_in_support(
    gamma: ValuedStructure, allow_larger_domain: bool = False, config: SolverConfig = DEFAULT_CONFIG
) -> bool:
    if gamma.size > 2 and not allow_larger_domain:
        raise PreconditionError(f"Siggers support check needs a domain of size at most 2, got {gamma.size}")
    operations = all_operations(gamma.size, 4, config)
    siggers = np.ones(operations.shape[1], dtype=bool)
    n = gamma.size
    for a, r, e in itertools.product(range(n), repeat=3):
        left = ((a * n + r) * n + e) * n + a
        right = ((r * n + a) * n + r) * n + e
        siggers &= operations[left] == operations[right]
    weights, value = _solve_weights(gamma, 4, operations, siggers.astype(np.int64), config)
    if weights is None or value is None:
        raise LpFailure("The uniform projections must always be feasible")
    logger.info("Maximum Siggers weight %s", value)
    return value > 0


def single_point_moves(size: int) -> np.ndarray:
    """Value columns of the identity and of every map sending one element onto another."""
    columns = [list(range(size))]
    for moved, target in itertools.permutations(range(size), 2):
        column = list(range(size))
        column[moved] = target
        columns.append(column)
    return np.array(columns, dtype=np.int64).T


def core_reduce(gamma: ValuedStructure, config: SolverConfig = DEFAULT_CONFIG) -> ValuedStructure:
    current = gamma
    while current.size > 1:
        try:
            operations = all_operations(current.size, 1, config)
        except CapExceededError:
            logger.warning("Core reduction on %d elements searches single-point moves only", current.size)
            operations = single_point_moves(current.size)
        non_injective = np.array(
            [len(set(operations[:, j].tolist())) < current.size for j in range(operations.shape[1])],
            dtype=np.int64,
        )
        weights, value = _solve_weights(current, 1, operations, non_injective, config)
        if weights is None or value is None or value == 0:
            break
        chosen = min(
            (j for j in weights if non_injective[j]),
            key=lambda j: (len(set(operations[:, j].tolist())), j),
        )
        image = sorted(set(int(v) for v in operations[:, chosen]))
        logger.info("Core reduction: %d -> %d elements", current.size, len(image))
        current = current.restrict(image)
    return current


@dataclass
class ClassificationReport:
    cyclic_fpol: str
    operation: Optional[FractionalOperation]
    siggers_support: Optional[bool]
    core_domain_size: int

    def to_dict(self) -> Dict[str, object]:
        support = None
        if self.operation is not None:
            support = [[list(op.values), str(w)] for op, w in sorted(self.operation.support.items(), key=lambda x: x[0].values)]
        return {
            "cyclic_fpol": self.cyclic_fpol,
            "support": support,
            "siggers_support": self.siggers_support,
            "core_domain_size": self.core_domain_size,
        }


def classify(
    gamma: ValuedStructure, ell: int = 2, siggers: bool = False, config: SolverConfig = DEFAULT_CONFIG
) -> ClassificationReport:
    core = core_reduce(gamma, config)
    try:
        omega = find_cyclic_fpol(core, ell, config)
        status = "found" if omega is not None else "none"
    except CapExceededError as e:
        logger.warning("Cyclic search skipped: %s", e)
        omega, status = None, "cap"
    siggers_result = None
    if siggers:
        try:
            siggers_result = siggers_in_support(core, config=config)
        except (CapExceededError, PreconditionError) as e:
            logger.warning("Siggers check skipped: %s", e)
    return ClassificationReport(status, omega, siggers_result, core.size)
