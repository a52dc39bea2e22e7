from src.database import Database


def test_save_and_read_runs(tmp_path) -> None:
    db = Database(str(tmp_path / "runs.db"))
    first = db.save_run("resilience", "preset:mu2", "hitting", "1", {"resilience": "1"}, {"m": None})
    second = db.save_run("classify", "preset:less", None, "none", {"cyclic_fpol": "none"}, {"arity": 2})
    assert second > first

    runs = db.get_runs()
    assert [run["command"] for run in runs] == ["resilience", "classify"]
    assert runs[0]["result"] == {"resilience": "1"}
    assert runs[0]["params"] == {"m": None}
    assert runs[0]["timestamp"] > 0

    assert [run["id"] for run in db.get_runs("classify")] == [second]
    assert db.get_run(first)["route"] == "hitting"
    assert db.get_run(second + 100) is None


def test_empty_payloads(tmp_path) -> None:
    db = Database(str(tmp_path / "runs.db"))
    run_id = db.save_run("gadgets")
    run = db.get_run(run_id)
    assert run["result"] is None
    assert run["params"] is None
