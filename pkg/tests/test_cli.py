import json
import re

import numpy as np
import pytest

from bellbound.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, main
from bellbound.schemas.scenario import BellFunctional, Scenario
from bellbound.services.games import GameService
from tests.conftest import random_functional

FLOAT_TOKEN = re.compile(r"\d\.\d|[eE][+-]?\d")


@pytest.fixture
def game_file(tmp_path):
    def write(d: int) -> str:
        path = tmp_path / f"xor{d}.json"
        assert main(["game", "--d", str(d), "--out", str(path)]) == EXIT_OK
        return str(path)
    return write


def _write(tmp_path, functional: BellFunctional, name: str = "functional.json") -> str:
    path = tmp_path / name
    path.write_text(functional.model_dump_json())
    return str(path)


class TestGame:
    def test_d5(self, tmp_path, capsys):
        out = tmp_path / "xor5.json"
        assert main(["game", "--d", "5", "--out", str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert len(data["coefficients"]) == 250
        assert sum(data["coefficients"]) == 50
        assert "250" in capsys.readouterr().out

    def test_d2(self, game_file):
        with open(game_file(2)) as handle:
            assert len(json.load(handle)["coefficients"]) == 16

    def test_d1_is_a_domain_error(self, tmp_path, capsys):
        assert main(["game", "--d", "1", "--out", str(tmp_path / "bad.json")]) == EXIT_ERROR
        assert "d >= 2" in capsys.readouterr().err

    def test_unwritable_path(self, tmp_path):
        assert main(["game", "--d", "2", "--out", str(tmp_path / "missing" / "x.json")]) == EXIT_ERROR


class TestBounds:
    def test_d5(self, game_file, capsys):
        path = game_file(5)
        capsys.readouterr()
        assert main(["bounds", path]) == EXIT_OK
        out = capsys.readouterr().out
        assert re.search(r"^local 6$", out, re.MULTILINE)
        assert re.search(r"^onebit 7 partition ", out, re.MULTILINE)
        assert re.search(r"^ns 10$", out, re.MULTILINE)
        assert not FLOAT_TOKEN.search(out)

    def test_d6_json(self, game_file, capsys):
        path = game_file(6)
        capsys.readouterr()
        assert main(["--json", "bounds", path]) == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert (record["local"]["value"], record["onebit"]["value"], record["ns"]) == (7, 8, 12)

    def test_zero_functional(self, tmp_path, capsys):
        path = _write(tmp_path, GameService.zero_functional(Scenario(m_a=2, m_b=2, o_a=2, o_b=2)))
        assert main(["--json", "bounds", path]) == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert (record["local"]["value"], record["onebit"]["value"], record["ns"]) == (0, 0, 0)

    def test_subset(self, game_file, capsys):
        path = game_file(3)
        capsys.readouterr()
        assert main(["bounds", path, "--which", "local"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("local 4")

    def test_missing_file(self, tmp_path):
        assert main(["bounds", str(tmp_path / "nope.json")]) == EXIT_ERROR

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"m_a": 2, "m_b": 2, "o_a": 2, "o_b": 2, "coefficients": [1, 2]}')
        assert main(["bounds", str(path)]) == EXIT_ERROR


class TestVerify:
    def test_d3_matches(self, game_file, capsys):
        path = game_file(3)
        capsys.readouterr()
        assert main(["verify", path]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "MATCH 5"

    def test_random_functional(self, tmp_path, capsys):
        functional = random_functional(Scenario(m_a=3, m_b=2, o_a=2, o_b=2), np.random.default_rng(17))
        assert main(["verify", _write(tmp_path, functional)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("MATCH ")

    def test_large_scenario_needs_force(self, game_file, capsys):
        path = game_file(5)
        capsys.readouterr()
        assert main(["verify", path]) == EXIT_ERROR
        assert "--force" in capsys.readouterr().err


class TestSeesaw:
    def test_d2_cannot_violate(self, game_file, tmp_path, capsys):
        path = game_file(2)
        model = tmp_path / "model.json"
        capsys.readouterr()
        code = main(["--seed", "3", "seesaw", path, "--restarts", "2", "--sweeps-max", "50",
                     "--out", str(model), "--require-violation"])
        assert code == EXIT_FAILED
        out = capsys.readouterr().out
        assert "not violated" in out
        assert model.exists()

        assert main(["report", str(model), path]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["onebit_bound"] == 4
        assert 0.0 <= report["w"] <= 1.0

    def test_without_requirement_succeeds(self, game_file, capsys):
        path = game_file(2)
        capsys.readouterr()
        assert main(["--json", "seesaw", path, "--restarts", "1", "--sweeps-max", "20"]) == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["score"] <= 4 + 1e-6
        assert record["beats_onebit"] is False

    @pytest.mark.slow
    def test_d5_headline(self, game_file, capsys):
        path = game_file(5)
        capsys.readouterr()
        assert main(["--seed", "0", "--json", "seesaw", path, "--restarts", "50", "--require-violation"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["score"] >= 7.17


class TestExperiments:
    def test_sweep_csv(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--d", "2", "--sigma-min", "0.001", "--sigma-max", "0.01", "--sigma-count", "2",
                     "--trials", "1", "--restarts", "1", "--sweeps-max", "20", "--include-zero", "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "sigma,seed,fidelity,score"
        assert len(lines) == 4
        assert lines[1].startswith("0,")

    def test_table_without_quantum(self, capsys):
        assert main(["table", "--d-min", "2", "--d-max", "3", "--no-quantum"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines == ["d,s_local,s_onebit,s_ns,s_quantum_lower", "2,3,4,4,", "3,4,5,6,"]

    def test_table_capacity(self, capsys):
        assert main(["table", "--d-min", "2", "--d-max", "9", "--no-quantum"]) == EXIT_ERROR
