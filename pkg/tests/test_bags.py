import json

import pytest

from src.bags import (
    database_from_dict,
    database_to_expression,
    expression_to_database,
    load_bag_database,
    random_bag_database,
)
from src.errors import InputFormatError, SignatureError
from src.queries import Signature


def test_json_multiplicity() -> None:
    db = database_from_dict({"relations": {"R": [[["a", "b"], 3], ["b", "c"], ["b", "c"]]}})
    assert db.multiplicity(("R", ("a", "b"))) == 3
    assert db.multiplicity(("R", ("b", "c"))) == 2
    assert db.total_weight() == 5
    assert db.domain == ("a", "b", "c")


def test_exogenous(bag) -> None:
    db = bag({"R": {("a", "b"): 2}, "S": {("b", "c"): 1, ("c", "c"): 1}}, exogenous=["R"], exogenous_tuples={"S": [["c", "c"]]})
    assert db.endogenous_ids() == [("S", ("b", "c"))]
    assert db.total_weight() == 1


def test_unknown_exogenous_relation() -> None:
    with pytest.raises(SignatureError):
        database_from_dict({"relations": {"R": [["a", "b"]]}, "exogenous": ["T"]})


def test_arity_mismatch() -> None:
    with pytest.raises(SignatureError):
        database_from_dict({"relations": {"R": [["a", "b"], ["a", "b", "c"]]}})
    with pytest.raises(SignatureError):
        database_from_dict({"relations": {"R": [["a"]]}}, Signature({"R": 2}))


@pytest.mark.parametrize("count", [0, -1, "x", 1.5])
def test_bad_multiplicity(count) -> None:
    with pytest.raises(InputFormatError):
        database_from_dict({"relations": {"R": [[["a", "b"], count]]}})


def test_load_json(tmp_path) -> None:
    path = tmp_path / "db.json"
    path.write_text(json.dumps({"relations": {"R": [[["a", "b"], 2]]}, "exogenous": ["R"]}))
    db = load_bag_database(str(path))
    assert db.multiplicity(("R", ("a", "b"))) == 2
    assert db.exogenous == frozenset({"R"})


def test_load_csv_directory(tmp_path) -> None:
    (tmp_path / "R.csv").write_text("src,dst,mult\na,b,2\na,b,1\nb,c,1\n")
    (tmp_path / "S.csv").write_text("src,dst,exo\nb,c,1\nc,a,0\n")
    (tmp_path / "exogenous.txt").write_text("R\n")
    db = load_bag_database(str(tmp_path))
    assert db.multiplicity(("R", ("a", "b"))) == 3
    assert db.exogenous == frozenset({"R"})
    assert db.exogenous_tuples == frozenset({("S", ("b", "c"))})
    assert db.endogenous_ids() == [("S", ("c", "a"))]


def test_csv_row_width(tmp_path) -> None:
    (tmp_path / "R.csv").write_text("src,dst\na,b\na\n")
    with pytest.raises(SignatureError):
        load_bag_database(str(tmp_path))


def test_csv_needs_directory(tmp_path) -> None:
    path = tmp_path / "R.csv"
    path.write_text("src,dst\na,b\n")
    with pytest.raises(InputFormatError):
        load_bag_database(str(path), "csv")


def test_unknown_format(tmp_path) -> None:
    with pytest.raises(InputFormatError):
        load_bag_database(str(tmp_path), "parquet")


def test_expression_keeps_multiplicity(bag) -> None:
    db = bag({"R": {("a", "b"): 2}, "S": {("b", "b"): 1}}, exogenous_tuples={"S": [["b", "b"]]})
    expr = database_to_expression(db)
    assert [a.symbol for a in expr.summands] == ["R", "R", "S:exo"]
    restored = expression_to_database(expr, db.signature)
    assert restored.to_dict() == db.to_dict()


def test_without_and_with_tuple(bag) -> None:
    db = bag({"R": {("a", "b"): 2, ("b", "c"): 1}})
    smaller = db.without([("R", ("a", "b"))])
    assert smaller.tuple_ids() == [("R", ("b", "c"))]
    bigger = db.with_tuple("R", ("c", "d"), 2)
    assert bigger.multiplicity(("R", ("c", "d"))) == 2
    assert "d" in bigger.domain


def test_random_database(rng) -> None:
    signature = Signature({"R": 2, "S": 1})
    for _ in range(10):
        db = random_bag_database(signature, rng, elements=3, total=5, exogenous=["S"])
        assert db.domain == ("e0", "e1", "e2")
        assert sum(db.multiplicity(t) for t in db.tuple_ids()) <= 5
        assert db.exogenous == frozenset({"S"})
