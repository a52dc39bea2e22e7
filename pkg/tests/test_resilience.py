from fractions import Fraction

import pytest

from src.bags import random_bag_database
from src.costs import INF
from src.errors import RouteError
from src.presets import fin_dual_structure, preset_query
from src.queries import make_structure, parse_union_query
from src.resilience import (
    brute_force_removal,
    brute_force_resilience,
    component_choices,
    find_removal,
    resilience_solve,
    simplify_query,
    verify_dual,
)
from src.routes import HittingSetRoute, RouteAnswer


def test_fin_dual_single_path(bag, fin_dual_query) -> None:
    db = bag({"R": {("a", "b"): 1}, "S": {("b", "c"): 1}})
    assert resilience_solve(db, fin_dual_query).value == 1
    via_dual = resilience_solve(db, fin_dual_query, dual=fin_dual_structure())
    assert via_dual.route == "dual"
    assert via_dual.value == 1
    assert len(via_dual.removed) == 1


def test_dual_route_respects_multiplicity(bag, fin_dual_query) -> None:
    db = bag({"R": {("a", "b"): 3}, "S": {("b", "c"): 2, ("b", "d"): 2}})
    result = resilience_solve(db, fin_dual_query, "dual", dual=fin_dual_structure())
    assert result.value == 3
    assert result.removed == [(("R", ("a", "b")), 3)]


def test_dual_route_needs_structure(bag, fin_dual_query) -> None:
    with pytest.raises(RouteError):
        resilience_solve(bag({"R": {("a", "b"): 1}}), fin_dual_query, "dual")


def test_two_cycle(bag, mu2) -> None:
    db = bag({"R": {("a", "b"): 1, ("b", "a"): 2}})
    result = resilience_solve(db, mu2)
    assert result.value == 1
    assert result.removed == [(("R", ("a", "b")), 1)]
    assert resilience_solve(db, mu2, "types").value == 1


def test_types_route_rejects_paths(bag, fin_dual_query) -> None:
    with pytest.raises(RouteError):
        resilience_solve(bag({"R": {("a", "b"): 1}}), fin_dual_query, "types")


def test_unknown_route(bag, mu2) -> None:
    with pytest.raises(RouteError):
        resilience_solve(bag({"R": {("a", "b"): 1}}), mu2, "magic")


@pytest.mark.parametrize(
    "answer",
    [RouteAnswer(Fraction(0)), RouteAnswer(Fraction(5), [("R", ("a", "b"))]), RouteAnswer(INF)],
)
def test_wrong_route_answer_is_reported(bag, mu2, monkeypatch, answer) -> None:
    monkeypatch.setattr(HittingSetRoute, "__call__", lambda self, db, mu, config=None: answer)
    with pytest.raises(RouteError):
        resilience_solve(bag({"R": {("a", "b"): 1, ("b", "a"): 2}}), mu2, "hitting")


def test_query_already_false(bag, fin_dual_query) -> None:
    result = resilience_solve(bag({"R": {("a", "b"): 1}, "S": {("c", "d"): 1}}), fin_dual_query)
    assert result.value == 0
    assert result.removed == []


def test_empty_database(bag, fin_dual_query) -> None:
    assert resilience_solve(bag({}), fin_dual_query).value == 0


def test_exogenous_witness_is_infinite(bag, fin_dual_query) -> None:
    db = bag({"R": {("a", "b"): 1}, "S": {("b", "c"): 1}}, exogenous=["R", "S"])
    result = resilience_solve(db, fin_dual_query, threshold=Fraction(10))
    assert result.value == INF
    assert result.decision is False
    assert result.to_dict()["resilience"] == "inf"


def test_exogenous_single_tuple(bag, fin_dual_query) -> None:
    db = bag({"R": {("a", "b"): 1}, "S": {("b", "c"): 1, ("b", "d"): 1}}, exogenous_tuples={"R": [["a", "b"]]})
    assert resilience_solve(db, fin_dual_query).value == 2
    assert resilience_solve(db, fin_dual_query, "dual", dual=fin_dual_structure()).value == 2


def test_query_exogenous_directive(bag) -> None:
    mu = parse_union_query("#relation R/2\n#relation S/2\n#exogenous R\nq() :- R(x,y), S(y,z).")
    db = bag({"R": {("a", "b"): 1}, "S": {("b", "c"): 4}})
    assert resilience_solve(db, mu).value == 4


def test_threshold_decision(bag, mu2) -> None:
    db = bag({"R": {("a", "b"): 2, ("b", "a"): 2}})
    assert resilience_solve(db, mu2, threshold=Fraction(2)).decision
    assert not resilience_solve(db, mu2, threshold=Fraction(1)).decision


def test_result_dict(bag, mu2) -> None:
    content = resilience_solve(bag({"R": {("a", "b"): 1, ("b", "a"): 2}}), mu2).to_dict()
    assert content == {
        "resilience": "1",
        "removed": [{"rel": "R", "tuple": ["a", "b"], "mult": 1}],
        "route": "hitting",
    }


def test_disconnected_query_takes_cheapest_component(bag) -> None:
    mu = parse_union_query("q() :- R(x,y), S(z).")
    choices = component_choices(mu)
    assert choices is not None and len(choices) == 2
    db = bag({"R": {("a", "b"): 2}, "S": {("c",): 1}})
    assert resilience_solve(db, mu).value == 1


def test_simplify_query() -> None:
    duplicated = parse_union_query("q() :- R(x,y), R(u,v), S(z).")
    assert [len(parts) for parts in simplify_query(duplicated)] == [2]
    union = parse_union_query("q() :- R(x,y), R(y,z).\nq() :- R(u,v).")
    simplified = simplify_query(union)
    assert len(simplified) == 1
    assert len(simplified[0][0].atoms) == 1


def test_brute_force(bag, fin_dual_query) -> None:
    db = bag({"R": {("a", "b"): 3, ("d", "b"): 1}, "S": {("b", "c"): 3}})
    value, removal = brute_force_removal(db, fin_dual_query)
    assert value == 3
    assert removal == [("S", ("b", "c"))]


def test_find_removal(bag, mu2) -> None:
    db = bag({"R": {("a", "b"): 1, ("b", "a"): 2, ("b", "c"): 1, ("c", "b"): 1}})
    removal = find_removal(db, mu2, Fraction(2))
    assert removal is not None
    assert sum(db.multiplicity(t) for t in removal) <= 2
    assert not resilience_solve(db.without(removal), mu2).value
    assert find_removal(db, mu2, Fraction(1)) is None


def test_verify_dual(fin_dual_query) -> None:
    assert verify_dual(fin_dual_query, fin_dual_structure(), max_elements=2).ok
    point = make_structure(["0"], {"R": [("0", "0")], "S": [("0", "0")]})
    check = verify_dual(fin_dual_query, point)
    assert not check.ok
    assert check.counterexample is not None


def test_verify_dual_is_exhaustive_on_small_signatures() -> None:
    mu = parse_union_query("#relation S/1\nq() :- S(x).")
    empty = make_structure(["0"], {"S": []}, mu.signature)
    check = verify_dual(mu, empty, max_elements=4, samples=5)
    assert check.ok
    assert check.checked == 2 + 4 + 8 + 16


@pytest.mark.slow
def test_verify_dual_covers_three_elements(fin_dual_query) -> None:
    check = verify_dual(fin_dual_query, fin_dual_structure(), max_elements=3)
    assert check.ok
    assert check.checked == 2**2 + 2**8 + 2**18


@pytest.mark.slow
def test_routes_agree_with_brute_force(corpus_query, rng) -> None:
    for _ in range(40):
        db = random_bag_database(corpus_query.signature, rng, elements=3, total=6)
        expected = brute_force_resilience(db, corpus_query)
        assert resilience_solve(db, corpus_query).value == expected


@pytest.mark.slow
def test_dual_route_agrees_on_random_databases(fin_dual_query, rng) -> None:
    for _ in range(40):
        db = random_bag_database(fin_dual_query.signature, rng, elements=3, total=6, exogenous=rng.sample(["R", "S"], 1))
        expected = resilience_solve(db, fin_dual_query).value
        assert resilience_solve(db, fin_dual_query, "dual", dual=fin_dual_structure()).value == expected


@pytest.mark.slow
@pytest.mark.parametrize("name", ["mu2", "mu1"])
def test_types_route_agrees_on_random_databases(name, rng) -> None:
    mu = preset_query(name)
    for _ in range(15):
        db = random_bag_database(mu.signature, rng, elements=2, total=5)
        assert resilience_solve(db, mu, "types").value == brute_force_resilience(db, mu)
