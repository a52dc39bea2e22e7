import math
from fractions import Fraction
from typing import Iterable, Union

from src.errors import InputFormatError

INF = math.inf

Cost = Union[Fraction, float]


def is_finite(cost: Cost) -> bool:
    return cost != INF


def parse_cost(value: Union[str, int, float, Fraction]) -> Cost:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputFormatError(f"Bad cost {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF
        if math.isnan(value) or math.isinf(value):
            raise InputFormatError(f"Bad cost {value!r}")
        return Fraction(str(value))
    text = str(value).strip().lower()
    if text in ("inf", "infinity", "+inf", "∞"):
        return INF
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputFormatError(f"Bad cost {value!r}") from None


def format_cost(cost: Cost) -> str:
    if cost == INF:
        return "inf"
    return str(Fraction(cost))


def add_costs(*costs: Cost) -> Cost:
    total: Cost = Fraction(0)
    for cost in costs:
        if cost == INF:
            return INF
        total += cost
    return total


def sum_costs(costs: Iterable[Cost]) -> Cost:
    return add_costs(*costs)


def scale_cost(factor: Union[Fraction, int], cost: Cost) -> Cost:
    # 0 * inf = 0
    if factor == 0:
        return Fraction(0)
    if cost == INF:
        return INF
    return Fraction(factor) * cost


def common_denominator(costs: Iterable[Cost]) -> int:
    result = 1
    for cost in costs:
        if cost != INF:
            result = math.lcm(result, Fraction(cost).denominator)
    return result
