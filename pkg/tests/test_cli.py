import json

import pytest

from src.cli import Cli
from src.database import Database


def output(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def cli(tmp_path) -> Cli:
    return Cli(db_path=str(tmp_path / "runs.db"))


@pytest.fixture
def two_cycle_db(tmp_path) -> str:
    path = tmp_path / "db.json"
    path.write_text(json.dumps({"relations": {"R": [[["a", "b"], 1], [["b", "a"], 2]]}}))
    return str(path)


@pytest.fixture
def path_db(tmp_path) -> str:
    path = tmp_path / "path.json"
    path.write_text(json.dumps({"relations": {"R": [["a", "b"]], "S": [["b", "c"]]}}))
    return str(path)


def test_solve(cli, tmp_path, capsys) -> None:
    instance = tmp_path / "cycle.json"
    summands = [["<", ["x", "y"]], ["<", ["y", "z"]], ["<", ["z", "x"]]]
    instance.write_text(json.dumps({"summands": summands, "threshold": 2}))
    cli.solve("preset:less", str(instance), threshold="3/2")
    result = output(capsys)
    assert result["cost"] == "2"
    assert result["blp_bound"] == "3/2"
    assert result["decision"] is False
    assert set(result["witness"]) == {"x", "y", "z"}


def test_classify(cli, capsys) -> None:
    cli.classify("preset:less")
    assert output(capsys)["cyclic_fpol"] == "none"


def test_resilience_records_runs(cli, tmp_path, two_cycle_db, capsys) -> None:
    cli.resilience("preset:mu2", two_cycle_db, threshold=1)
    result = output(capsys)
    assert result["resilience"] == "1"
    assert result["decision"] is True
    runs = Database(str(tmp_path / "runs.db")).get_runs("resilience")
    assert len(runs) == 1
    assert runs[0]["value"] == "1"
    assert runs[0]["route"] == "hitting"


def test_resilience_dual_route(cli, path_db, capsys) -> None:
    cli.resilience("preset:fin-dual", path_db, route="dual=preset:fin-dual")
    result = output(capsys)
    assert result["route"] == "dual"
    assert result["resilience"] == "1"


def test_rpq(cli, path_db, capsys) -> None:
    cli.rpq("R;S", path_db)
    assert output(capsys)["answers"] == [["a", "c"]]
    cli.rpq("R;S", path_db, resilience=True)
    assert output(capsys)["resilience"] == "1"


def test_gadgets(cli, capsys) -> None:
    cli.gadgets.list()
    assert "nae" in output(capsys)
    cli.gadgets.verify("nae")
    assert output(capsys)["passed"] is True


def test_solver_errors_exit_with_json(cli, two_cycle_db, capsys) -> None:
    with pytest.raises(SystemExit) as error:
        cli.resilience("preset:unknown", two_cycle_db)
    assert error.value.code == 1
    result = output(capsys)
    assert result["error"] == "InputFormatError"
    assert "unknown" in result["message"]


def test_infinite_threshold_is_rejected(cli, two_cycle_db, capsys) -> None:
    with pytest.raises(SystemExit):
        cli.resilience("preset:mu2", two_cycle_db, threshold="inf")
    assert output(capsys)["error"] == "InputFormatError"
