import json
import math

import numpy as np
import pytest

from avoidlimit.cli import EXIT_OK, EXIT_REFUSED, RunConfig, main
from avoidlimit.permcore import Permutation, avoids, enumerate_avoiders, perm_from_words
from avoidlimit.words import LayeredWords


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    provenance = json.loads(lines[0][2:])
    header = lines[1].split(",")
    rows = np.array([[float(x) for x in line.split(",")] for line in lines[2:]])
    return provenance, header, rows


class TestSample:
    def test_byte_identical(self, tmp_path):
        args = ["sample", "--n", "20", "--d", "3", "--seed", "5", "--replicas", "3", "--format", "csv", "--format", "svg", "--format", "json"]
        assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert "permutations.txt" in names and "paths_2.svg" in names and "sample.json" in names
        for name in names:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_workers_do_not_change_output(self, tmp_path):
        args = ["sample", "--n", "50", "--d", "2", "--seed", "1", "--replicas", "4"]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b"), "--workers", "2"])
        assert (tmp_path / "a" / "permutations.txt").read_text() == (tmp_path / "b" / "permutations.txt").read_text()

    def test_files(self, tmp_path):
        assert main(["sample", "--n", "30", "--d", "3", "--seed", "2", "--replicas", "2", "--out", str(tmp_path)]) == 0
        perms = [Permutation.from_text(line) for line in (tmp_path / "permutations.txt").read_text().splitlines()]
        assert len(perms) == 2 and all(avoids(p, 3) for p in perms)
        for k in range(2):
            for stem in ("p_sigma", "s_hat"):
                prov, header, rows = read_csv(tmp_path / f"{stem}_{k}.csv")
                assert prov["seed"] == 2 and prov["stream"] == k and prov["n"] == 30
                assert header == ["t", "f_1", "f_2", "f_3"]
                assert rows[0].tolist() == [0, 0, 0, 0]
                assert rows[-1].tolist() == [1, 0, 0, 0]

    def test_grid_option(self, tmp_path):
        main(["sample", "--n", "30", "--d", "2", "--grid", "10", "--out", str(tmp_path)])
        _, _, rows = read_csv(tmp_path / "p_sigma_0.csv")
        assert rows[:, 0].tolist() == [k / 10 for k in range(11)]

    def test_dyson_source(self, tmp_path):
        args = ["sample", "--source", "dyson", "--d", "4", "--grid", "32", "--out", str(tmp_path), "--format", "csv", "--format", "json"]
        assert main(args) == 0
        _, header, rows = read_csv(tmp_path / "eigen_0.csv")
        assert header == ["t", "lambda_1", "lambda_2", "lambda_3", "lambda_4"]
        assert len(rows) == 33
        assert np.max(np.abs(rows[:, 1:].sum(axis=1))) < 1e-10
        assert np.all(np.diff(rows[:, 1:], axis=1) <= 0)
        assert json.loads((tmp_path / "bridge_0.json").read_text())["d"] == 4

    def test_large_curves_ordered_away_from_ends(self, tmp_path):
        """Five curves at n = 10^5; crossings are confined to the extreme ends and are of order n^-1/2."""
        n, d = 100_000, 5
        assert main(["sample", "--n", str(n), "--d", str(d), "--seed", "20261016", "--out", str(tmp_path), "--format", "csv", "--format", "svg"]) == 0
        _, header, rows = read_csv(tmp_path / "p_sigma_0.csv")
        assert len(header) == 6
        excess = np.diff(rows[:, 1:], axis=1).max(axis=1)
        crossing = rows[excess > 1e-12, 0]
        assert np.all((crossing < 0.01) | (crossing > 0.99))
        assert excess.max() <= 10 / math.sqrt(2 * d * n)
        assert (tmp_path / "paths_0.svg").read_text().count("<polyline") == 2 * d

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(SystemExit, match="cannot create output directory"):
            main(["sample", "--n", "5", "--d", "2", "--out", str(blocker / "sub")])


class TestCompare:
    def test_refuses_small_n(self, capsys):
        assert main(["compare", "--n", "20", "--d", "2", "--replicas", "50"]) == EXIT_REFUSED
        assert "at least 122" in capsys.readouterr().err

    def test_self_comparison(self, tmp_path, capsys):
        code = main(["compare", "--against", "self", "--n", "40", "--d", "2", "--replicas", "200", "--seed", "3", "--out", str(tmp_path)])
        assert code == EXIT_OK
        data = json.loads((tmp_path / "compare.json").read_text())
        assert data["passed"] and data["against"] == "self"
        assert len(data["reports"]) == 2 * 3
        assert "threshold" in capsys.readouterr().out


class TestVerify:
    def test_quick(self, tmp_path, capsys):
        assert main(["verify", "--quick", "--out", str(tmp_path)]) == EXIT_OK
        data = json.loads((tmp_path / "verify.json").read_text())
        assert data["checks"] and all(c["passed"] for c in data["checks"])
        assert "FAIL" not in capsys.readouterr().out


class TestEnumerate:
    def test_stdout(self, capsys):
        assert main(["enumerate", "--n", "4", "--d", "3"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == [p.to_text() for p in enumerate_avoiders(4, 3)]
        assert len(lines) == 23

    def test_words(self, tmp_path):
        main(["enumerate", "--n", "5", "--d", "2", "--words", "--out", str(tmp_path)])
        lines = (tmp_path / "avoiders.txt").read_text().splitlines()
        perms = [perm_from_words(LayeredWords.from_text(line, 2)) for line in lines]
        assert perms == enumerate_avoiders(5, 2)

    def test_guard(self, capsys):
        assert main(["enumerate", "--n", "11", "--d", "2"]) == EXIT_REFUSED
        assert "limit" in capsys.readouterr().err


class TestBridgeDP:
    def test_json_and_samples(self, tmp_path, capsys):
        assert main(["bridge-dp", "--n", "4", "--d", "2", "--samples", "5", "--out", str(tmp_path), "--format", "json"]) == 0
        assert "N(4, 0) = 42" in capsys.readouterr().out
        data = json.loads((tmp_path / "bridge_dp.json").read_text())
        assert data == {"n": 4, "d": 2, "states": [{"gaps": [0], "count": "42"}]}
        words = [LayeredWords.from_text(line, 2) for line in (tmp_path / "bridges.txt").read_text().splitlines()]
        assert len(words) == 5 and all(sorted(w.a) == sorted(w.b) for w in words)

    def test_refusal(self, capsys):
        assert main(["bridge-dp", "--n", "5000", "--d", "4"]) == EXIT_REFUSED
        assert "refusing" in capsys.readouterr().err


class TestConfig:
    @pytest.mark.parametrize("field, value", [("n", 0), ("d", 1), ("d", 9), ("replicas", 0)])
    def test_invalid(self, field, value):
        kwargs = dict(command="sample", n=5, d=2, replicas=1, seed=0, grid=None, out=None, formats=("csv",))
        kwargs[field] = value
        with pytest.raises(ValueError, match=field):
            RunConfig(**kwargs)

    def test_cli_rejects(self, capsys):
        assert main(["sample", "--d", "9"]) == EXIT_REFUSED
        assert "d must lie in [2, 8]" in capsys.readouterr().err
