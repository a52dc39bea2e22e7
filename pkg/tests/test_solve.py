import itertools
import random
from fractions import Fraction

import pytest

from src.costs import INF
from src.errors import RewriteContextError
from src.presets import GEQ, LESS, gamma_geq, gamma_less, gamma_not_equal
from src.solve import (
    RewriteContext,
    decide,
    derived_structure,
    reduce_pp_instance,
    rewrite_instance,
    solve_blp,
    solve_exact,
)
from src.valued import (
    EMPTY,
    EQUALITY,
    Atom,
    Instance,
    PowerDefinition,
    TauExpression,
    ValuedRelation,
    ValuedStructure,
    evaluate,
    pp_power,
)


def cycle() -> TauExpression:
    return TauExpression.from_atoms([(LESS, ["x", "y"]), (LESS, ["y", "z"]), (LESS, ["z", "x"])])


def test_max_cut_triangle() -> None:
    result = solve_exact(cycle(), gamma_less())
    assert result.cost == 2
    assert result.witness is not None


def test_geq_pair_is_free() -> None:
    expr = TauExpression.from_atoms([(GEQ, ["x", "y"]), (GEQ, ["y", "x"])])
    result = solve_exact(expr, gamma_geq())
    assert result.cost == 0
    assert result.witness[0] == result.witness[1]


def test_empty_relation_is_unsatisfiable() -> None:
    expr = TauExpression.from_atoms([(LESS, ["x", "y"]), (EMPTY, ["x"])])
    result = solve_exact(expr, gamma_less())
    assert result.cost == INF
    assert result.witness is None


def test_named_witness() -> None:
    expr = TauExpression.from_atoms([(LESS, ["x", "y"])])
    result = solve_exact(expr, gamma_less())
    assert result.named_witness(expr, gamma_less()) == {"x": "0", "y": "1"}


def test_witness_is_lexicographically_least() -> None:
    gamma = gamma_not_equal(2).with_relations({"U": ValuedRelation.constant(1, 2, Fraction(0))})
    expr = TauExpression.from_atoms([("!=", ["x", "y"]), ("U", ["y"]), ("U", ["y"])])
    result = solve_exact(expr, gamma)
    assert result.witness == (0, 1)
    assert result.named_witness(expr, gamma) == {"x": "0", "y": "1"}


def test_decide() -> None:
    assert decide(Instance(cycle(), Fraction(2)), gamma_less())
    assert not decide(Instance(cycle(), Fraction(3, 2)), gamma_less())


def test_blp_gap_on_max_cut() -> None:
    result = solve_blp(cycle(), gamma_less())
    assert result.bound == Fraction(3, 2)
    assert result.exact


def test_blp_single_summand() -> None:
    result = solve_blp(TauExpression.from_atoms([(LESS, ["x", "y"])]), gamma_less())
    assert result.bound == 0


def test_blp_matches_exact_on_geq_chains() -> None:
    rng = random.Random(0)
    gamma = gamma_geq()
    for _ in range(20):
        names = [f"v{i}" for i in range(4)]
        atoms = [(GEQ, rng.sample(names, 2)) for _ in range(rng.randint(1, 6))]
        expr = TauExpression.from_atoms(atoms)
        assert solve_blp(expr, gamma).bound == solve_exact(expr, gamma).cost


def test_rewrite_equality_merges_variables() -> None:
    expr = TauExpression.from_atoms([(EQUALITY, ["x", "y"]), (LESS, ["x", "y"])])
    rewritten = rewrite_instance(Instance(expr, Fraction(1)), "equality", RewriteContext(gamma_less()))
    assert rewritten.expression.variables == ("x",)
    assert [(a.symbol, a.args) for a in rewritten.expression.summands] == [(LESS, (0, 0))]


def test_rewrite_empty() -> None:
    expr = TauExpression.from_atoms([(EMPTY, ["x"])])
    rewritten = rewrite_instance(Instance(expr, Fraction(5)), "empty", RewriteContext(gamma_less()))
    assert not decide(rewritten, gamma_less())


def test_rewrite_scale_shift_threshold() -> None:
    context = RewriteContext(gamma_less(), symbol="T", source=LESS, factor=Fraction(1, 2), shift=Fraction(1))
    expr = TauExpression.from_atoms([("T", ["x", "y"]), (LESS, ["y", "x"])])
    rewritten = rewrite_instance(Instance(expr, Fraction(3)), "scale_shift", context)
    assert rewritten.threshold == 4
    symbols = [a.symbol for a in rewritten.expression.summands]
    assert symbols.count(LESS) == 3


def test_rewrite_feas_copy_count() -> None:
    source = ValuedRelation(1, 3, (Fraction(0), Fraction(3), INF))
    other = ValuedRelation(1, 3, (Fraction(1), Fraction(0), Fraction(2)))
    gamma = ValuedStructure(("a", "b", "c"), {"W": source, "U": other})
    context = RewriteContext(gamma, symbol="F", source="W")
    expr = TauExpression.from_atoms([("F", ["x"]), ("F", ["y"]), ("U", ["x"])])
    rewritten = rewrite_instance(Instance(expr, Fraction(1)), "feas", context)
    symbols = [a.symbol for a in rewritten.expression.summands]
    assert symbols.count("U") == 7
    assert symbols.count("W") == 2
    assert rewritten.threshold == 7 * 1 + 2 * 3


@pytest.mark.parametrize("case", ["feas", "opt"])
def test_rewrite_preserves_answers(case: str) -> None:
    source = ValuedRelation(2, 3, tuple(Fraction(v) for v in (2, 0, 1, 1, 3, 0, 2, 2, 1)))
    cheap = ValuedRelation(1, 3, (Fraction(0), Fraction(1), Fraction(1, 2)))
    gamma = ValuedStructure(("a", "b", "c"), {"W": source, "U": cheap})
    context = RewriteContext(gamma, symbol="D", source="W")
    derived = derived_structure(case, context)
    expr = TauExpression.from_atoms([("D", ["x", "y"]), ("U", ["x"]), ("U", ["y"]), ("D", ["y", "z"])])
    for threshold in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(3)):
        instance = Instance(expr, threshold)
        assert decide(instance, derived) == decide(rewrite_instance(instance, case, context), gamma)


def test_rewrite_expressibility() -> None:
    gamma = gamma_less()
    inner = TauExpression.from_atoms([(LESS, ["a", "b"]), (LESS, ["b", "c"])])
    definition = PowerDefinition(2, inner, (0, 2))
    context = RewriteContext(gamma, symbol="P", definition=definition)
    expr = TauExpression.from_atoms([("P", ["x", "y"]), (LESS, ["y", "x"])])
    derived = derived_structure("expressibility", context)
    for threshold in (Fraction(0), Fraction(1), Fraction(2)):
        instance = Instance(expr, threshold)
        assert decide(instance, derived) == decide(rewrite_instance(instance, "expressibility", context), gamma)


def test_rewrite_needs_context() -> None:
    expr = TauExpression.from_atoms([("T", ["x", "y"])])
    with pytest.raises(RewriteContextError):
        rewrite_instance(Instance(expr, Fraction(1)), "opt", RewriteContext(gamma_less(), symbol="T"))


def test_reduce_pp_instance() -> None:
    gamma = gamma_less()
    expr = TauExpression.from_atoms([(LESS, ["x1", "y1"]), (LESS, ["y2", "x2"])])
    free = tuple(expr.variable_index(v) for v in ("x1", "x2", "y1", "y2"))
    definitions = {"S": PowerDefinition(2, expr, free)}
    delta = pp_power(gamma, 2, definitions)
    outer = TauExpression.from_atoms([("S", ["p", "q"]), ("S", ["q", "r"]), ("S", ["r", "p"])])
    reduced = reduce_pp_instance(Instance(outer, Fraction(0)), gamma, 2, definitions)
    assert solve_exact(reduced.expression, gamma).cost == solve_exact(outer, delta).cost


COSTS = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), INF]
THRESHOLDS = [Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), Fraction(5)]


def random_gamma(rng: random.Random, size: int) -> ValuedStructure:
    domain = tuple(str(i) for i in range(size))
    binary = ValuedRelation(2, size, tuple(rng.choice(COSTS) for _ in range(size**2)))
    unary = ValuedRelation(1, size, tuple(rng.choice(COSTS) for _ in range(size)))
    return ValuedStructure(domain, {"A": binary, "B": unary})


def random_expression(rng: random.Random, symbols, variables=("x", "y", "z"), summands: int = 4) -> TauExpression:
    """`symbols` maps each symbol to its arity."""
    atoms = []
    for _ in range(rng.randint(1, summands)):
        symbol = rng.choice(sorted(symbols))
        atoms.append((symbol, [rng.choice(variables) for _ in range(symbols[symbol])]))
    return TauExpression.from_atoms(atoms, variables)


def brute_force(expr: TauExpression, gamma: ValuedStructure):
    best, witness = INF, None
    for assignment in itertools.product(range(gamma.size), repeat=len(expr.variables)):
        cost = evaluate(expr, gamma, assignment)
        if cost < best:
            best, witness = cost, assignment
    return best, witness


@pytest.mark.parametrize("seed", range(5))
def test_exact_matches_brute_force(seed: int) -> None:
    rng = random.Random(seed)
    for _ in range(40):
        gamma = random_gamma(rng, rng.randint(2, 3))
        expr = random_expression(rng, {"A": 2, "B": 1}, ("x", "y", "z", "w"), 6)
        cost, witness = brute_force(expr, gamma)
        result = solve_exact(expr, gamma)
        assert result.cost == cost
        assert result.witness == witness


@pytest.mark.parametrize("seed", range(5))
def test_blp_never_exceeds_exact(seed: int) -> None:
    rng = random.Random(100 + seed)
    for _ in range(40):
        gamma = random_gamma(rng, rng.randint(2, 3))
        expr = random_expression(rng, {"A": 2, "B": 1}, ("x", "y", "z", "w"), 6)
        assert solve_blp(expr, gamma).bound <= solve_exact(expr, gamma).cost


def test_exact_cost_ignores_order_and_names() -> None:
    rng = random.Random(5)
    for _ in range(60):
        gamma = random_gamma(rng, 3)
        expr = random_expression(rng, {"A": 2, "B": 1}, ("x", "y", "z", "w"), 6)
        permutation = list(range(len(expr.variables)))
        rng.shuffle(permutation)
        summands = [Atom(a.symbol, tuple(permutation[v] for v in a.args)) for a in expr.summands]
        rng.shuffle(summands)
        names = [""] * len(permutation)
        for old, new in enumerate(permutation):
            names[new] = f"renamed_{expr.variables[old]}"
        moved = TauExpression(tuple(names), tuple(summands))
        assert solve_exact(moved, gamma).cost == solve_exact(expr, gamma).cost


def random_case(case: str, rng: random.Random):
    """A random instance over the derived structure, with its context."""
    gamma = random_gamma(rng, rng.randint(2, 3))
    if case == "equality":
        return random_expression(rng, {"A": 2, "B": 1, EQUALITY: 2}), RewriteContext(gamma)
    if case == "empty":
        symbols = {"A": 2, "B": 1, EMPTY: 1} if rng.random() < 0.5 else {"A": 2, "B": 1}
        return random_expression(rng, symbols), RewriteContext(gamma)
    outer = random_expression(rng, {"D": 2, "A": 2, "B": 1})
    if case == "expressibility":
        inner = random_expression(rng, {"A": 2, "B": 1}, ("a", "b", "c"), 3)
        return outer, RewriteContext(gamma, symbol="D", definition=PowerDefinition(2, inner, (0, 1)))
    if case == "scale_shift":
        factor = rng.choice([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)])
        shift = rng.choice([Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(2)])
        return outer, RewriteContext(gamma, symbol="D", source="A", factor=factor, shift=shift)
    return outer, RewriteContext(gamma, symbol="D", source="A")


@pytest.mark.parametrize("case", ["equality", "empty", "expressibility", "scale_shift", "feas", "opt"])
def test_random_rewrites_preserve_answers(case: str) -> None:
    rng = random.Random(case)
    for _ in range(200):
        expr, context = random_case(case, rng)
        instance = Instance(expr, rng.choice(THRESHOLDS))
        derived = derived_structure(case, context)
        assert decide(instance, derived) == decide(rewrite_instance(instance, case, context), context.gamma)
