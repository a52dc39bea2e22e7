from fractions import Fraction

import pytest

from src.costs import INF, add_costs, common_denominator, format_cost, parse_cost, scale_cost
from src.errors import InputFormatError


@pytest.mark.parametrize(
    "value,expected",
    [("3/4", Fraction(3, 4)), ("inf", INF), (2, Fraction(2)), (0.5, Fraction(1, 2)), (" 1 ", Fraction(1))],
)
def test_parse_cost(value, expected) -> None:
    assert parse_cost(value) == expected


@pytest.mark.parametrize("value", ["-inf", "abc", "1/0", True, float("nan")])
def test_parse_cost_rejects(value) -> None:
    with pytest.raises(InputFormatError):
        parse_cost(value)


def test_format_cost() -> None:
    assert format_cost(INF) == "inf"
    assert format_cost(Fraction(6, 4)) == "3/2"
    assert format_cost(Fraction(2)) == "2"


def test_arithmetic() -> None:
    assert add_costs(Fraction(1), INF) == INF
    assert scale_cost(0, INF) == 0
    assert scale_cost(2, Fraction(1, 3)) == Fraction(2, 3)
    assert common_denominator([Fraction(1, 2), Fraction(1, 3), INF]) == 6
