import itertools
import random
from typing import List

import pytest

from src.errors import QuerySyntaxError, SignatureError
from src.presets import fin_dual_structure, preset_query
from src.queries import (
    ConjunctiveQuery,
    Signature,
    analyze,
    canonical_database,
    components,
    core_of,
    enumerate_homomorphisms,
    has_homomorphism,
    implies,
    is_isomorphic,
    make_structure,
    parse_union_query,
    relational_structure_from_dict,
    relational_structure_to_dict,
    satisfies,
)


def single(text: str):
    return parse_union_query(text).disjuncts[0]


def test_parse_conjunctive_query() -> None:
    cq = single("q() :- R(x,y), S(y,z).")
    assert cq.variables == ("x", "y", "z")
    assert [(a.relation, a.args) for a in cq.atoms] == [("R", (0, 1)), ("S", (1, 2))]


def test_parse_union() -> None:
    mu = parse_union_query("q() :- R(x,y).\nq() :- S(x).")
    assert len(mu.disjuncts) == 2
    assert mu.signature.arity("S") == 1


def test_parse_keeps_duplicate_atoms() -> None:
    assert len(single("q() :- R(x,y), R(x,y).").atoms) == 2


def test_parse_arity_mismatch() -> None:
    with pytest.raises(SignatureError):
        parse_union_query("#relation R/2\nq() :- R(x,y,z).")


def test_parse_unknown_relation_with_declarations() -> None:
    with pytest.raises(SignatureError):
        parse_union_query("#relation R/2\nq() :- T(x,y).")


def test_parse_syntax_error_position() -> None:
    with pytest.raises(QuerySyntaxError) as error:
        parse_union_query("q() :- R(x,y) S(y).")
    assert error.value.position == 14


def test_parse_without_rules_points_at_end() -> None:
    text = "#relation R/2\n"
    with pytest.raises(QuerySyntaxError) as error:
        parse_union_query(text)
    assert error.value.position == len(text)


def test_parse_exogenous_directive() -> None:
    mu = parse_union_query("#relation R/2\n#relation S/2\n#exogenous S\nq() :- R(x,y), S(y,z).")
    assert mu.exogenous == frozenset({"S"})


def test_canonical_database() -> None:
    db = canonical_database(single("q() :- R(x,y), S(y,z)."))
    assert db.domain == ("x", "y", "z")
    assert db.facts("R") == {("x", "y")}
    assert db.facts("S") == {("y", "z")}


def test_canonical_database_loop_and_duplicates() -> None:
    assert canonical_database(single("q() :- R(x,x).")).facts("R") == {("x", "x")}
    assert canonical_database(single("q() :- R(x,y), R(x,y).")).facts("R") == {("x", "y")}


def test_analyze() -> None:
    triangle = analyze(preset_query("triangle").disjuncts[0])
    assert triangle.connected and not triangle.incidence_acyclic and triangle.gaifman_complete
    path = analyze(preset_query("fin-dual").disjuncts[0])
    assert path.connected and path.incidence_acyclic and not path.gaifman_complete
    assert analyze(preset_query("mu1").disjuncts[0]).gaifman_complete


def test_components() -> None:
    parts = components(single("q() :- R(x,y), S(u,v), R(y,z)."))
    assert sorted(len(p.atoms) for p in parts) == [1, 2]


def test_dual_rejects_canonical_database() -> None:
    cq = preset_query("fin-dual").disjuncts[0]
    assert not has_homomorphism(canonical_database(cq), fin_dual_structure())


def test_single_edge_maps_twice_into_dual() -> None:
    edge = make_structure(["a", "b"], {"R": [("a", "b")]}, preset_query("fin-dual").signature)
    assert len(list(enumerate_homomorphisms(edge, fin_dual_structure()))) == 2


def test_identity_homomorphism() -> None:
    b = fin_dual_structure()
    assert has_homomorphism(b, b)


def test_core_of() -> None:
    two_edges = make_structure(["a", "b", "c", "d"], {"R": [("a", "b"), ("c", "d")]})
    assert core_of(two_edges).size() == 2
    path = make_structure(["a", "b", "c"], {"R": [("a", "b"), ("b", "c")]})
    assert is_isomorphic(core_of(path), path)
    point = make_structure(["a"], {"R": []}, path.signature)
    assert core_of(point).size() == 1


def test_implies() -> None:
    a = single("q() :- R(x,y), R(y,z).")
    b = single("q() :- R(u,v).")
    assert implies(a, b)
    assert not implies(single("q() :- R(x,y)."), single("q() :- R(u,u)."))
    assert implies(a, a)


def test_satisfies_union() -> None:
    mu = parse_union_query("q() :- R(x,x).\nq() :- S(x).")
    structure = make_structure(["a"], {"S": [("a",)]}, mu.signature)
    assert satisfies(structure, mu)


def test_relational_structure_dict_format() -> None:
    b = fin_dual_structure()
    assert relational_structure_from_dict(relational_structure_to_dict(b)) == b


def test_homomorphisms_come_in_lexicographic_order() -> None:
    edge = make_structure(["b", "a"], {"R": [("b", "a")]}, Signature({"R": 2}))
    target = make_structure(["2", "0", "1"], {"R": [(x, y) for x in "201" for y in "201" if x != y]})
    maps = [(h["b"], h["a"]) for h in enumerate_homomorphisms(edge, target)]
    assert maps == [("2", "0"), ("2", "1"), ("0", "2"), ("0", "1"), ("1", "2"), ("1", "0")]


def random_structure(rng: random.Random, size: int):
    domain = [f"e{i}" for i in range(size)]
    facts = [(a, b) for a in domain for b in domain if rng.random() < 0.3]
    return make_structure(domain, {"R": facts}, Signature({"R": 2}))


def random_query(rng: random.Random, variables: int = 5, atoms: int = 4) -> ConjunctiveQuery:
    names = [f"v{i}" for i in range(variables)]
    parts = []
    for _ in range(rng.randint(1, atoms)):
        if rng.random() < 0.7:
            parts.append(f"R({rng.choice(names)},{rng.choice(names)})")
        else:
            parts.append(f"S({rng.choice(names)})")
    return single("#relation R/2\n#relation S/1\nq() :- " + ", ".join(parts) + ".")


@pytest.mark.parametrize("seed", range(40))
def test_core_is_homomorphically_equivalent(seed: int) -> None:
    rng = random.Random(seed)
    s = random_structure(rng, rng.randint(1, 4))
    core = core_of(s)
    assert core.size() <= s.size()
    assert has_homomorphism(s, core)
    assert has_homomorphism(core, s)


def test_implies_is_reflexive_and_transitive() -> None:
    rng = random.Random(7)
    queries = [random_query(rng) for _ in range(12)]
    for a in queries:
        assert implies(a, a)
    for a, b, c in itertools.product(queries, repeat=3):
        if implies(a, b) and implies(b, c):
            assert implies(a, c)


def union_find_parts(cq: ConjunctiveQuery) -> List[List[str]]:
    parent = list(range(len(cq.variables)))

    def find(v: int) -> int:
        while parent[v] != v:
            v = parent[v]
        return v

    for atom in cq.atoms:
        for v in atom.args[1:]:
            parent[find(v)] = find(atom.args[0])
    groups = {}
    for v, name in enumerate(cq.variables):
        groups.setdefault(find(v), []).append(name)
    return sorted(sorted(group) for group in groups.values())


@pytest.mark.parametrize("seed", range(30))
def test_components_match_union_find(seed: int) -> None:
    cq = random_query(random.Random(seed), variables=6, atoms=5)
    parts = components(cq)
    assert sorted(sorted(part.variables) for part in parts) == union_find_parts(cq)
    assert sum(len(part.atoms) for part in parts) == len(cq.atoms)
