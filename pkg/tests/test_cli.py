import json

import numpy as np
import pytest

from conftest import H, X
from dechist import io
from dechist.cli import main
from dechist.generators import block_preserving_unitary, perturb_unitary
from dechist.partition import diagonal_partition

OMEGA = np.diag([1, np.exp(2j * np.pi / 3)])


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    fine = write("fine.json", {"dim": 2, "blocks": [[0], [1]]})
    return {
        "write": write,
        "dir": tmp_path,
        "fine": fine,
        "H": write("h.json", io.matrix_to_dict(H, "unitary")),
        "X": write("x.json", io.matrix_to_dict(X, "unitary")),
        "rho0": write("rho0.json", io.matrix_to_dict(np.diag([1.0, 0.0]), "density")),
    }


class TestValidate:
    def test_valid_files(self, files, capsys):
        assert main(["validate", files["H"], files["fine"]]) == 0
        assert "fine-grained" in capsys.readouterr().out

    def test_ragged(self, files):
        bad = files["write"]("bad.json", {"dim": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]})
        assert main(["validate", bad]) == 2

    def test_duplicated_projector(self, files, capsys):
        dup = files["write"]("dup.json", {"dim": 2, "blocks": [[0], [0]]})
        assert main(["validate", dup]) == 1
        assert "orthogonality defect 1.00e+00" in capsys.readouterr().out

    def test_wrong_kind(self, files):
        assert main(["validate", "--as", "density", files["H"]]) == 1

    def test_missing_file(self, files):
        assert main(["validate", str(files["dir"] / "nope.json")]) == 2


class TestDecohere:
    def test_bit_flip(self, files):
        assert main(["decohere", files["X"], files["fine"]]) == 0

    def test_hadamard(self, files, capsys):
        assert main(["decohere", files["H"], files["fine"], "--kmax", "2"]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "'histories': [[0, 0], [1, 0]]" in out

    def test_cap(self, files, capsys):
        part = files["write"]("p4.json", {"dim": 4, "blocks": [[0], [1], [2], [3]]})
        U = files["write"]("i4.json", io.matrix_to_dict(np.eye(4)))
        assert main(["decohere", U, part, "--kmax", "7"]) == 4
        assert "16384" in capsys.readouterr().err

    def test_json_report(self, files, capsys):
        assert main(["decohere", files["H"], files["fine"], "--kmax", "2", "--format", "json"]) == 1
        (report,) = json.loads(capsys.readouterr().out)
        assert report["verdict"] is False
        assert report["defect"] == pytest.approx(0.25)
        assert report["truncation"]["k_max"] == 2

    def test_dump_and_recheck(self, files, capsys):
        dump = str(files["dir"] / "d.json")
        probs = str(files["dir"] / "p.json")
        args = ["decohere", files["H"], files["fine"], "--rho", files["rho0"], "--kmax", "2"]
        assert main(args + ["--dump-matrix", dump, "--dump-probabilities", probs]) == 1
        assert main(["check-matrix", dump]) == 1
        table = io.probabilities_from_dict(io.read_json(probs))
        assert list(table.values()) == pytest.approx([0.25] * 4)
        assert main(["validate", dump]) == 0

    def test_dump_needs_rho(self, files):
        assert main(["decohere", files["H"], files["fine"], "--dump-matrix", "x.json"]) == 2

    def test_non_unitary_input(self, files):
        U = files["write"]("two.json", io.matrix_to_dict(2 * np.eye(2)))
        assert main(["decohere", U, files["fine"]]) == 2


class TestConditions:
    def test_block_preserving(self, files):
        part = diagonal_partition(3, [[0, 1], [2]])
        U = files["write"]("bp.json", io.matrix_to_dict(block_preserving_unitary(part, [0, 1], 4)))
        P = files["write"]("c3.json", {"dim": 3, "blocks": [[0, 1], [2]]})
        assert main(["conditions", U, P, "--kmax", "3"]) == 0

    def test_hadamard(self, files, capsys):
        assert main(["conditions", files["H"], files["fine"], "--kmax", "2"]) == 1
        out = capsys.readouterr().out
        for name in ("commutativity", "single_iteration", "sandwich", "classicality_preservation"):
            assert name in out
        assert out.count("FAIL") == 6

    def test_inconclusive(self, files):
        part = diagonal_partition(3, [[0, 1], [2]])
        V = perturb_unitary(block_preserving_unitary(part, [0, 1], 4), 1e-8, 1)
        U = files["write"]("v.json", io.matrix_to_dict(V))
        P = files["write"]("c3.json", {"dim": 3, "blocks": [[0, 1], [2]]})
        assert main(["conditions", U, P, "--kmax", "3"]) == 3

    def test_bad_tolerances(self, files):
        assert main(["conditions", files["X"], files["fine"], "--tol-accept", "1e-3", "--tol-violate", "1e-6"]) == 2


class TestRecurrence:
    def test_rational_phase(self, files, capsys):
        U = files["write"]("w.json", io.matrix_to_dict(OMEGA))
        assert main(["recurrence", U, "--epsilon", "0.1", "--qmax", "10"]) == 0
        assert "q = 3" in capsys.readouterr().out

    def test_identity(self, files, capsys):
        U = files["write"]("i.json", io.matrix_to_dict(np.eye(2)))
        assert main(["recurrence", U, "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)["q"] == 1

    def test_not_found(self, files, capsys):
        U = files["write"]("w.json", io.matrix_to_dict(OMEGA))
        assert main(["recurrence", U, "--qmax", "2"]) == 1
        assert "not found" in capsys.readouterr().out

    def test_haar(self, files, capsys):
        out = files["dir"] / "haar.json"
        assert main(["generate", "haar", "--dim", "2", "--seed", "3", "--out", str(out)]) == 0
        assert main(["recurrence", str(out), "--epsilon", "0.3", "--qmax", "1000", "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)["defect"] < 0.3


class TestGenerate:
    def test_haar(self, files):
        out = files["dir"] / "u.json"
        assert main(["generate", "haar", "--dim", "3", "--seed", "7", "--out", str(out)]) == 0
        assert main(["validate", str(out)]) == 0
        first = out.read_text()
        main(["generate", "haar", "--dim", "3", "--seed", "7", "--out", str(out)])
        assert out.read_text() == first

    def test_partition(self, files, capsys):
        out = files["dir"] / "p.json"
        assert main(["generate", "partition", "--dim", "3", "--blocks", "2,1", "--seed", "7", "--out", str(out)]) == 0
        assert main(["validate", str(out)]) == 0
        assert "coarse-grained" in capsys.readouterr().out

    def test_block_preserving_rank_mismatch(self, files):
        P = files["write"]("c3.json", {"dim": 3, "blocks": [[0, 1], [2]]})
        assert main(["generate", "block-preserving", "--partition", P, "--permutation", "1,0"]) == 2

    def test_block_preserving_then_conditions(self, files):
        out = files["dir"] / "bp.json"
        assert main(["generate", "block-preserving", "--partition", files["fine"], "--permutation", "1,0",
                     "--seed", "2", "--out", str(out)]) == 0
        assert main(["conditions", str(out), files["fine"]]) == 0

    def test_density(self, files):
        out = files["dir"] / "r.json"
        assert main(["generate", "density", "--dim", "4", "--out", str(out)]) == 0
        assert main(["validate", "--as", "density", str(out)]) == 0
