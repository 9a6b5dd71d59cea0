import json
import subprocess
import sys

import numpy as np
import pytest

from latzeta import io as lio
from latzeta.cli import main
from latzeta.errors import DegenerateBasisError
from latzeta.lattice import LatticeBasis, hexagonal_lattice


def write(path, rows, n=None, d=None):
    n = len(rows) if n is None else n
    d = (len(rows[0]) if rows else 0) if d is None else d
    path.write_text(json.dumps({"ambient_dim": n, "rank": d, "basis": rows}))
    return str(path)


class TestIO:
    def test_round_trip(self, tmp_path):
        L = hexagonal_lattice()
        lio.save_lattice(L, tmp_path / "a.json")
        assert np.array_equal(lio.load_lattice(tmp_path / "a.json").columns, L.columns)
        T = LatticeBasis.trivial(2)
        lio.save_lattice(T, tmp_path / "t.json")
        assert lio.load_lattice(tmp_path / "t.json").is_trivial

    def test_decimal_strings(self):
        L = lio.lattice_from_dict({"ambient_dim": 2, "rank": 2, "basis": [["1", "0.5"], ["0", " 1.25 "]]})
        assert L.columns[1, 1] == 1.25

    @pytest.mark.parametrize(
        "obj",
        [
            {"rank": 1, "basis": [[1]]},
            {"ambient_dim": 2, "rank": 1, "basis": [[1]]},
            {"ambient_dim": 1, "rank": 1, "basis": [["x"]]},
            {"ambient_dim": 1, "rank": 1, "basis": [[True]]},
            {"ambient_dim": 2, "rank": 2, "basis": [[1, 2], [2, 4]]},
        ],
    )
    def test_bad_input(self, obj):
        with pytest.raises(DegenerateBasisError):
            lio.lattice_from_dict(obj)


class TestCLI:
    def test_eval(self, tmp_path, capsys):
        f = write(tmp_path / "z1.json", [[1]])
        assert main(["eval", "--lattice", f, "--fn", "zetaq", "--s", "1", "--q", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["value"] == pytest.approx(1.8138674864970, rel=1e-9)
        assert main(["eval", "--lattice", f, "--fn", "theta", "--tau", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(1.0864348112133)
        assert main(["eval", "--lattice", f, "--fn", "zetaq-psf", "--s", "1", "--q", "3"]) == 0

    def test_bessel_table(self, tmp_path, capsys):
        png = tmp_path / "k.png"
        assert main(["bessel-table", "--alpha", "2", "--x-grid", "0:1:0.5", "--plot", str(png)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "x,K_alpha,Kbar_alpha,recurrence_gap"
        assert len(lines) == 4 and lines[1] == "0.0,inf,1.0,0.0"
        assert png.stat().st_size > 0
        assert main(["bessel-table", "--alpha", "0.5", "--x-grid", "1:1:1"]) == 0
        assert capsys.readouterr().out.strip().splitlines()[1].endswith(",")
        with pytest.raises(SystemExit):
            main(["bessel-table", "--alpha", "1", "--x-grid", "2:1:1"])

    def test_stability_commands(self, tmp_path, capsys):
        f = write(tmp_path / "d.json", [[1, 0], [0, 4]])
        assert main(["check-stable", "--lattice", f]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "not-unit-det"
        out, tr = tmp_path / "s.json", tmp_path / "a.json"
        assert main(["stabilize", "--lattice", f, "--out", str(out), "--transform", str(tr)]) == 0
        assert np.allclose(lio.load_lattice(out).gram, np.eye(2))
        assert np.allclose(json.loads(tr.read_text())["matrix"], np.diag([1, 0.25]))
        bad = write(tmp_path / "b.json", [[0.5, 0], [0, 2]])
        assert main(["stabilize", "--lattice", bad, "--out", str(out)]) == 1
        assert "error" in capsys.readouterr().err

    def test_decompose(self, tmp_path, capsys):
        f = write(tmp_path / "z.json", [[1, 0, 0], [0, 0, 1], [0, 1, 0]])
        assert main(["decompose", "--lattice", f]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["ranks"] == [1, 1, 1] and out["is_Zn"]

    def test_laplacian(self, tmp_path, capsys):
        f = write(tmp_path / "z2.json", [[1, 0], [0, 1]])
        assert main(["laplacian", "--l2", f, "--s", "3", "--q", "0.1", "--fd-check"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["closed_form"] > 0 and out["relative_gap"] < 1e-4

    def test_verify(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["verify", "--n", "2", "--s", "2", "--q", "0.25", "--count", "3", "--seed", "4"]
        assert main(args + ["--out", str(a), "--plot", str(tmp_path / "m.png")]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "m.png").stat().st_size > 0
        assert main(args + ["--csv"]) == 0
        assert capsys.readouterr().out.startswith("id,n,s,q")
        assert main(["verify", "--n", "2", "--s", "2", "--q", "5"]) == 1

    def test_missing_file(self, capsys):
        assert main(["eval", "--lattice", "/nonexistent.json", "--fn", "theta"]) == 1

    def test_console_script(self):
        r = subprocess.run([sys.executable, "-m", "latzeta.cli", "eval", "--help"], capture_output=True, text=True)
        assert r.returncode == 0 and "--lattice" in r.stdout
