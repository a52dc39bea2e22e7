import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.costs import INF, Cost, common_denominator
from src.errors import CapExceededError

logger = logging.getLogger(__name__)

# exact integers survive float64 below this magnitude
FLOAT_EXACT_LIMIT = 2**53

Term = Tuple[Tuple[int, ...], Sequence[Cost]]
Factor = Tuple[Tuple[int, ...], np.ndarray]


@dataclass
class ScaledTable:
    """Min-sum result over the kept variables, stored as integers scaled by `scale`."""

    array: np.ndarray
    scale: int

    def to_cost(self, value: object) -> Cost:
        if value == INF:
            return INF
        if isinstance(value, float):
            value = round(value)
        return Fraction(int(value), self.scale)  # type: ignore

    def cost_at(self, index: Tuple[int, ...]) -> Cost:
        return self.to_cost(self.array[index])

    def minimum(self) -> Cost:
        return self.to_cost(self.array.min())

    def to_costs(self) -> List[Cost]:
        return [self.to_cost(v) for v in self.array.reshape(-1).tolist()]


def _convert(values: Sequence[Cost], scale: int, use_float: bool) -> np.ndarray:
    if use_float:
        return np.array([INF if v == INF else float(Fraction(v) * scale) for v in values], dtype=np.float64)
    return np.array([INF if v == INF else int(Fraction(v) * scale) for v in values], dtype=object)


def _term_factor(
    args: Tuple[int, ...],
    table: np.ndarray,
    size: int,
    fixed: Dict[int, int],
) -> Factor:
    arity = len(args)
    if arity == 0:
        return (), table.reshape(())
    table = table.reshape((size,) * arity)
    unique = sorted(set(args))
    grids = np.indices((size,) * len(unique))
    table = table[tuple(grids[unique.index(a)] for a in args)]
    for var in [v for v in unique if v in fixed]:
        table = np.take(table, fixed[var], axis=unique.index(var))
        unique.remove(var)
    return tuple(unique), table


def _expand(variables: Tuple[int, ...], array: np.ndarray, target: Tuple[int, ...], size: int) -> np.ndarray:
    return array.reshape([size if v in variables else 1 for v in target])


def _combine(factors: List[Factor], size: int, cell_cap: int) -> Factor:
    union = tuple(sorted(set(v for variables, _ in factors for v in variables)))
    cells = size ** len(union)
    if cells > cell_cap:
        raise CapExceededError("elimination_cell_cap", cells, cell_cap)
    result = None
    for variables, array in factors:
        expanded = _expand(variables, array, union, size)
        result = expanded if result is None else result + expanded
    assert result is not None
    return union, np.broadcast_to(result, (size,) * len(union))


def minimize_terms(
    terms: Sequence[Term],
    num_variables: int,
    size: int,
    keep: Sequence[int],
    fixed: Optional[Dict[int, int]] = None,
    cell_cap: int = 50000000,
) -> ScaledTable:
    """
    Min-sum variable elimination.

    Each term is (variable indices, flattened cost table in lexicographic order).
    Variables outside `keep` and `fixed` are minimized out; the result has one axis per kept
    variable, in the given order.
    """
    fixed = dict(fixed or {})
    assert not set(fixed) & set(keep), "a variable cannot be both kept and fixed"
    assert len(set(keep)) == len(keep)
    all_values = [v for _, values in terms for v in values]
    scale = common_denominator(all_values)
    bound = sum(max((abs(Fraction(v)) for v in values if v != INF), default=0) for _, values in terms) * scale
    use_float = bound < FLOAT_EXACT_LIMIT

    factors: List[Factor] = []
    for args, values in terms:
        factors.append(_term_factor(tuple(args), _convert(values, scale, use_float), size, fixed))

    eliminated = [v for v in range(num_variables) if v not in fixed and v not in keep]
    remaining = set(eliminated)
    while remaining:
        best: Optional[Tuple[int, int]] = None
        for var in sorted(remaining):
            neighbours = set(v for variables, _ in factors if var in variables for v in variables)
            degree = len(neighbours - {var})
            if best is None or degree < best[0]:
                best = (degree, var)
        assert best is not None
        var = best[1]
        remaining.remove(var)
        touching = [f for f in factors if var in f[0]]
        if not touching:
            continue
        factors = [f for f in factors if var not in f[0]]
        union, combined = _combine(touching, size, cell_cap)
        reduced = combined.min(axis=union.index(var))
        factors.append((tuple(v for v in union if v != var), reduced))

    target = tuple(sorted(keep))
    zero = np.zeros((size,) * len(target), dtype=np.float64 if use_float else object)
    if not use_float:
        zero[...] = 0
    _, total = _combine(factors + [(target, zero)], size, cell_cap) if factors else (target, zero)
    if len(target) > 1:
        total = np.transpose(total, [target.index(v) for v in keep])
    logger.debug("Eliminated %d variables, kept %d, backend %s", len(eliminated), len(keep), "float" if use_float else "object")
    return ScaledTable(np.ascontiguousarray(total), scale)
