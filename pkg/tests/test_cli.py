import json

import numpy as np
import pytest
from conftest import constant_instance

from ctlp.bundled import OPTIMAL_VALUE, example1_document
from ctlp.cli import main
from ctlp.instance import CTLPInstance, dump_instance, load_instance
from ctlp.timefunc import Breakpoints, PiecewiseFn


@pytest.fixture
def example_dir(tmp_path):
    assert main(["example", str(tmp_path), "--nodes", "2"]) == 0
    return tmp_path


def read_json(path):
    return json.loads(path.read_text())


def edit_first_row(src, dest, column, value):
    """Copy a trajectory CSV with ``value`` added to one entry of the first node."""
    rows = src.read_text().splitlines()
    first = rows[1].split(",")
    first[column] = repr(float(first[column]) + value)
    dest.write_text("\n".join([rows[0], ",".join(first), *rows[2:]]) + "\n")
    return dest


def write_instance(path, inst):
    path.write_text(dump_instance(inst))
    return path


class TestExample:
    def test_writes_files(self, example_dir):
        for name in ("example1.json", "zbar.csv", "u.csv", "w.csv"):
            assert (example_dir / name).exists()
        assert load_instance((example_dir / "example1.json").read_text()).m == 5


class TestSolve:
    def test_example_objective(self, example_dir):
        out = example_dir / "run"
        assert main(["solve", str(example_dir / "example1.json"), "--nodes", "64", "--out", str(out)]) == 0
        summary = read_json(out / "summary.json")
        assert summary["schema"] == 1 and "ctlp" in summary["generator"]
        assert summary["status"] == "Optimal"
        assert abs(summary["objective"] - OPTIMAL_VALUE) <= 1e-6
        assert summary["nodes"] == 2 * 65
        assert (out / "z.csv").exists() and (out / "u.csv").exists()

    def test_stdout_summary(self, example_dir, capsys):
        assert main(["solve", str(example_dir / "example1.json"), "--nodes", "2"]) == 0
        assert json.loads(capsys.readouterr().out)["objective"] == pytest.approx(-11 / 3, abs=1e-10)

    def test_deterministic(self, example_dir):
        a, b = example_dir / "a", example_dir / "b"
        for d in (a, b):
            main(["solve", str(example_dir / "example1.json"), "--nodes", "8", "--out", str(d)])
        for name in ("summary.json", "z.csv", "u.csv"):
            assert (a / name).read_text() == (b / name).read_text()

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["solve", str(bad)]) == 1
        assert "invalid JSON" in capsys.readouterr().err

    def test_bad_field_reports_path(self, tmp_path, capsys):
        doc = json.loads(example1_document())
        doc["A"][1][0] = "abc"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        assert main(["solve", str(bad)]) == 1
        assert "$.A[1][0]" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["solve", str(tmp_path / "nope.json")]) == 1

    def test_pointwise_infeasible(self, tmp_path, capsys):
        bp = Breakpoints([0, 1, 2])
        A = [[PiecewiseFn.constant(1.0, bp)], [PiecewiseFn.constant(-1.0, bp)]]
        b = [PiecewiseFn.constant(1.0, bp), PiecewiseFn(bp, [[0.0], [-2.0]])]
        path = write_instance(tmp_path / "inf.json", CTLPInstance(A, b, [PiecewiseFn.constant(1.0, bp)]))
        out = tmp_path / "run"
        assert main(["solve", str(path), "--nodes", "4", "--out", str(out)]) == 2
        summary = read_json(out / "summary.json")
        assert summary["status"] == "Infeasible"
        assert summary["witness"]["t"] >= 1.0
        assert "Infeasible" in capsys.readouterr().err
        assert not (out / "z.csv").exists()

    def test_bad_node_count(self, example_dir):
        assert main(["solve", str(example_dir / "example1.json"), "--nodes", "0"]) == 1

    def test_usage_error_is_input_error(self):
        with pytest.raises(SystemExit) as info:
            main(["solve"])
        assert info.value.code == 1


class TestCertify:
    def run(self, example_dir, *extra):
        out = example_dir / "cert.json"
        code = main(["certify", str(example_dir / "example1.json"), "--out", str(out), *extra])
        return code, read_json(out)

    def test_reference_trajectory(self, example_dir):
        code, rep = self.run(example_dir, "--trajectory", str(example_dir / "zbar.csv"), "--beta", "0.125")
        assert code == 0
        assert rep["BetaFR"]["holds"] is False and 1.9 <= rep["BetaFR"]["witness"]["t"] <= 2.0
        assert rep["BetaRC"]["holds"] is True and rep["BetaRC"]["isharp_in_I0"] is True
        assert rep["BetaA"]["basis"] == "BetaRC"
        assert rep["index_base"] == 0 and rep["schema"] == 1

    def test_huge_beta(self, example_dir):
        code, rep = self.run(example_dir, "--trajectory", str(example_dir / "zbar.csv"), "--beta", "10")
        assert code == 3
        # every row within 10 of binding is beta-active; the first row's slack reaches 1.5
        assert all(s == [0, 1, 2, 3, 4] for s in rep["active_sets"]["Ibeta"])

    def test_solves_when_no_trajectory(self, example_dir):
        code, rep = self.run(example_dir, "--nodes", "4", "--beta", "0.125")
        assert code == 0 and rep["BetaRC"]["holds"]

    def test_sweep(self, example_dir):
        code, rep = self.run(example_dir, "--trajectory", str(example_dir / "zbar.csv"), "--beta-sweep", "1e-3:1:4")
        assert code == 0
        assert [r["beta"] for r in rep["sweep"]] == pytest.approx(np.geomspace(1e-3, 1, 4).tolist())

    def test_bad_sweep(self, example_dir):
        with pytest.raises(SystemExit) as info:
            main(["certify", str(example_dir / "example1.json"), "--beta-sweep", "1:2"])
        assert info.value.code == 1

    def test_identity_toy(self, tmp_path):
        path = write_instance(tmp_path / "id.json", constant_instance([[1, 0], [0, 1]], [0, 0], [-1, -1]))
        out = tmp_path / "cert.json"
        assert main(["certify", str(path), "--nodes", "2", "--out", str(out)]) == 0
        assert read_json(out)["BetaFR"]["kind"] == "BetaFR"

    def test_infeasible_trajectory(self, example_dir, tmp_path):
        bad = edit_first_row(example_dir / "zbar.csv", tmp_path / "z.csv", 1, 9.0)
        assert main(["certify", str(example_dir / "example1.json"), "--trajectory", str(bad)]) == 4


class TestCheck:
    def run(self, example_dir, *extra):
        out = example_dir / "check.json"
        code = main(["check", str(example_dir / "example1.json"), "--beta", "0.125", "--out", str(out), *extra])
        return code, read_json(out)

    def test_reference_triple(self, example_dir):
        d = example_dir
        code, rep = self.run(
            d, "--trajectory", str(d / "zbar.csv"), "--multipliers", str(d / "u.csv"), "--dual", str(d / "w.csv")
        )
        assert code == 0
        assert rep["kkt"]["pass"] and abs(rep["duality"]["gap"]) <= 1e-9
        assert rep["duality"]["verdicts"] == ["WeakDualityHolds", "ZeroGap", "StrongDualityCertified"]
        assert rep["complementary_slackness"]["certified"]

    def test_recovers_multipliers(self, example_dir):
        code, rep = self.run(example_dir, "--trajectory", str(example_dir / "zbar.csv"))
        assert code == 0
        assert rep["multipliers"]["recovered_from"] == "BetaRC"
        assert rep["kkt"]["stationarity_residual"] <= 1e-10

    def test_corrupted_multipliers(self, example_dir, tmp_path):
        bad = edit_first_row(example_dir / "u.csv", tmp_path / "u.csv", 5, 0.1)
        code, rep = self.run(example_dir, "--trajectory", str(example_dir / "zbar.csv"), "--multipliers", str(bad))
        assert code == 4
        assert not rep["kkt"]["pass"]
        assert rep["kkt"]["stationarity_residual"] == pytest.approx(0.1, abs=1e-12)

    def test_no_certificate(self, example_dir):
        out = example_dir / "check.json"
        args = ["check", str(example_dir / "example1.json"), "--trajectory", str(example_dir / "zbar.csv")]
        assert main([*args, "--beta", "10", "--out", str(out)]) == 3
        assert read_json(out)["multipliers"] is None


class TestDual:
    def test_example(self, example_dir, tmp_path):
        out = tmp_path / "dual.json"
        assert main(["dual", str(example_dir / "example1.json"), "--out", str(out)]) == 0
        doc = read_json(out)
        assert doc["sense"] == "dual"
        assert main(["dual", str(out)]) == 1

    def test_refusal_names_field(self, example_dir, tmp_path, capsys):
        out = tmp_path / "dual.json"
        main(["dual", str(example_dir / "example1.json"), "--out", str(out)])
        assert main(["dual", str(out)]) == 1
        assert "$.sense" in capsys.readouterr().err
        assert main(["solve", str(out)]) == 1

    def test_scalar_toy(self, tmp_path, capsys):
        path = write_instance(tmp_path / "toy.json", constant_instance([[2.0]], [4.0], [2.0]))
        assert main(["dual", str(path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["sense"] == "dual" and doc["m"] == 1 and doc["n"] == 1
        assert [[float(v) for v in piece] for piece in doc["A"][0][0]] == [[2.0]]
