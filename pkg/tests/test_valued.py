import itertools
from fractions import Fraction

import pytest

from src.costs import INF
from src.errors import InputFormatError, SignatureError
from src.presets import GEQ, LESS, fin_dual_structure, gamma_geq, gamma_lcc, gamma_less
from src.queries import Signature, make_structure
from src.valued import (
    EMPTY,
    PowerDefinition,
    TauExpression,
    ValuedRelation,
    ValuedStructure,
    apply_clone_operator,
    automorphisms,
    dual_to_valued,
    evaluate,
    express,
    power_structure,
    pp_power,
    structure_from_dict,
    structure_to_dict,
)


def unary(*values) -> ValuedRelation:
    return ValuedRelation(1, len(values), tuple(values))


def test_evaluate_max_cut_pair() -> None:
    expr = TauExpression.from_atoms([(LESS, ["x", "y"]), (LESS, ["y", "x"])])
    assert evaluate(expr, gamma_less(), (0, 1)) == 1


def test_evaluate_empty_sum() -> None:
    assert evaluate(TauExpression(("x",)), gamma_less(), (1,)) == 0


def test_evaluate_empty_relation() -> None:
    expr = TauExpression.from_atoms([(EMPTY, ["x"])])
    assert evaluate(expr, gamma_less(), (0,)) == INF


def test_evaluate_unknown_symbol() -> None:
    with pytest.raises(SignatureError):
        evaluate(TauExpression.from_atoms([("T", ["x"])]), gamma_less(), (0,))


def test_feas_and_opt() -> None:
    relation = unary(Fraction(0), Fraction(1), INF)
    assert apply_clone_operator("feas", relation).values == (0, 0, INF)
    assert apply_clone_operator("opt", relation).values == (0, INF, INF)


def test_scale_by_zero_clears_infinity() -> None:
    empty = ValuedRelation.constant(1, 2, INF)
    assert apply_clone_operator("scale", empty, Fraction(0)).values == (0, 0)


def test_shift() -> None:
    shifted = apply_clone_operator("shift", gamma_less().relation(LESS), Fraction(2))
    assert shifted((0, 1)) == 2
    assert shifted((1, 1)) == 3


def test_opt_of_unequal_is_not_equal() -> None:
    gamma = gamma_lcc(3)
    expressed = express(gamma, TauExpression.from_atoms([("N", ["x", "y"])]), ["x", "y"])
    opt = apply_clone_operator("opt", expressed)
    for t, value in opt.items():
        assert value == (0 if t[0] != t[1] else INF)


def test_express_without_bound_variables_is_the_table() -> None:
    gamma = gamma_less()
    expr = TauExpression.from_atoms([(LESS, ["x", "y"]), (LESS, ["y", "x"])])
    expressed = express(gamma, expr, ["x", "y"])
    for t in itertools.product(range(2), repeat=2):
        assert expressed(t) == evaluate(expr, gamma, t)


def test_express_minimizes_bound_variables() -> None:
    expr = TauExpression.from_atoms([(LESS, ["x", "y"]), (LESS, ["y", "z"])])
    expressed = express(gamma_less(), expr, ["x", "z"])
    # x < y < z is impossible on two values, so one edge always pays
    assert expressed.values == (1, 1, 1, 1)


def test_express_with_pinned_variable() -> None:
    expr = TauExpression.from_atoms([(LESS, ["x", "y"])])
    assert express(gamma_less(), expr, ["x"], fixed={"y": 0}).values == (1, 1)


def test_pp_power_identity() -> None:
    gamma = gamma_less()
    identity = PowerDefinition(2, TauExpression.from_atoms([(LESS, ["a", "b"])]), (0, 1))
    delta = pp_power(gamma, 1, {LESS: identity})
    assert delta.relation(LESS).values == gamma.relation(LESS).values


def test_pp_power_square() -> None:
    expr = TauExpression.from_atoms([(LESS, ["x1", "y1"]), (LESS, ["x2", "y2"])])
    free = tuple(expr.variable_index(v) for v in ("x1", "x2", "y1", "y2"))
    definition = PowerDefinition(2, expr, free)
    delta = pp_power(gamma_less(), 2, {"S": definition})
    origin, top = delta.element_index("(0,0)"), delta.element_index("(1,1)")
    assert delta.relation("S")((origin, top)) == 0
    assert delta.relation("S")((top, origin)) == 2


def test_power_structure_averages_slices() -> None:
    gamma = gamma_less()
    square = power_structure(gamma, 2)
    a, b = square.element_index("(0,1)"), square.element_index("(1,1)")
    # slices (0,1) and (1,1) cost 0 and 1
    assert square.relation(LESS)((a, b)) == Fraction(1, 2)


def test_dual_to_valued() -> None:
    gamma = dual_to_valued(fin_dual_structure())
    relation = gamma.relation("R")
    assert relation((0, 1)) == 0 and relation((1, 1)) == 0
    assert relation((0, 0)) == 1 and relation((1, 0)) == 1


def test_dual_to_valued_exogenous() -> None:
    gamma = dual_to_valued(fin_dual_structure(), ["S"])
    assert gamma.relation("S")((1, 0)) == INF
    assert gamma.relation("S")((1, 1)) == INF
    assert gamma.relation("S")((0, 1)) == 0


def test_dual_to_valued_empty_relation() -> None:
    b = make_structure(["0", "1"], {"R": [("0", "1")]}, Signature({"R": 2, "T": 1}))
    assert dual_to_valued(b).relation("T").values == (1, 1)


def test_automorphisms() -> None:
    assert automorphisms(gamma_less()) == [(0, 1)]
    assert len(automorphisms(gamma_lcc(3))) == 6


def test_structure_json_format() -> None:
    gamma = gamma_geq()
    assert structure_from_dict(structure_to_dict(gamma)) == gamma


def test_structure_default_cost() -> None:
    content = {"domain": ["a", "b"], "relations": {"U": {"arity": 1, "default": "inf", "entries": [[["a"], "1/2"]]}}}
    gamma = structure_from_dict(content)
    assert gamma.relation("U").values == (Fraction(1, 2), INF)


def test_structure_missing_cost() -> None:
    content = {"domain": ["a", "b"], "relations": {"U": {"arity": 1, "entries": [[["a"], 0]]}}}
    with pytest.raises(InputFormatError):
        structure_from_dict(content)


def test_domain_size_mismatch() -> None:
    with pytest.raises(SignatureError):
        ValuedStructure(("0", "1", "2"), {GEQ: gamma_geq().relation(GEQ)})
