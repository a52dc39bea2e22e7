from fractions import Fraction
from typing import Dict

from src.costs import INF
from src.errors import InputFormatError
from src.queries import RelationalStructure, UnionQuery, make_structure, parse_union_query
from src.valued import ValuedRelation, ValuedStructure

LESS = "<"
GEQ = ">="

QUERY_TEXTS: Dict[str, str] = {
    "fin-dual": "#relation R/2\n#relation S/2\nq() :- R(x,y), S(y,z).\n",
    "simple-inf": "#relation R/2\n#relation S/3\nq() :- R(x,y), S(x,y,z).\n",
    "triangle": "#relation R/2\n#relation S/2\n#relation T/2\nq() :- R(x,y), S(y,z), T(z,x).\n",
    "mu2": "#relation R/2\nq() :- R(x,y), R(y,x).\n",
    "mu1": "#relation S/1\n#relation R/2\nq() :- S(x), R(x,y), R(y,x), R(y,y).\n",
}


def gamma_less() -> ValuedStructure:
    """Max-cut: ({0,1}, <) with cost 0 on (0,1) and 1 elsewhere."""
    relation = ValuedRelation.from_function(2, 2, lambda t: Fraction(0) if t[0] < t[1] else Fraction(1))
    return ValuedStructure(("0", "1"), {LESS: relation})


def gamma_geq() -> ValuedStructure:
    relation = ValuedRelation.from_function(2, 2, lambda t: Fraction(0) if t[0] >= t[1] else Fraction(1))
    return ValuedStructure(("0", "1"), {GEQ: relation})


def gamma_lcc(n: int = 3) -> ValuedStructure:
    """Finite restriction of least correlation clustering: E prices inequality, N prices equality."""
    equal = ValuedRelation.from_function(2, n, lambda t: Fraction(0) if t[0] == t[1] else Fraction(1))
    unequal = ValuedRelation.from_function(2, n, lambda t: Fraction(0) if t[0] != t[1] else Fraction(1))
    return ValuedStructure(tuple(str(i) for i in range(n)), {"E": equal, "N": unequal})


def gamma_not_equal(n: int = 3) -> ValuedStructure:
    relation = ValuedRelation.from_function(2, n, lambda t: Fraction(0) if t[0] != t[1] else INF)
    return ValuedStructure(tuple(str(i) for i in range(n)), {"!=": relation})


def fin_dual_structure() -> RelationalStructure:
    return make_structure(
        ["0", "1"],
        {"R": [("0", "1"), ("1", "1")], "S": [("0", "0"), ("0", "1")]},
    )


STRUCTURES = {
    "less": gamma_less,
    "geq": gamma_geq,
    "lcc": gamma_lcc,
}

DUALS = {
    "fin-dual": fin_dual_structure,
}


def preset_query(name: str) -> UnionQuery:
    if name not in QUERY_TEXTS:
        raise InputFormatError(f"Unknown query preset {name}; available: {', '.join(sorted(QUERY_TEXTS))}")
    return parse_union_query(QUERY_TEXTS[name])


def preset_structure(name: str) -> ValuedStructure:
    if name not in STRUCTURES:
        raise InputFormatError(f"Unknown structure preset {name}; available: {', '.join(sorted(STRUCTURES))}")
    return STRUCTURES[name]()


def preset_dual(name: str) -> RelationalStructure:
    if name not in DUALS:
        raise InputFormatError(f"Unknown dual preset {name}; available: {', '.join(sorted(DUALS))}")
    return DUALS[name]()
