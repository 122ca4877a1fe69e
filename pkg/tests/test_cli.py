import csv
import json

import pytest

from restrictlab import cli
from restrictlab.chains import ChainError, ChainStep


def run(tmp_path, *args):
    return cli.main(["run", *args, "--out", str(tmp_path)])


def manifest(tmp_path, name):
    return json.loads((tmp_path / f"{name}.json").read_text())


class TestConfig:
    def test_parse_text(self):
        raw = cli.parse_config_text("# header\nN = 32\n\nradii = 1, 2 ;3  # trailing\n")
        assert cli.typed(raw) == {"N": 32, "radii": [1.0, 2.0, 3.0]}

    def test_bad_line(self):
        with pytest.raises(cli.ConfigError, match="line 2"):
            cli.parse_config_text("N = 32\njust words\n")

    @pytest.mark.parametrize("raw,match", [({"bogus": "1"}, "unknown"), ({"N": "many"}, "'N'")])
    def test_typed_rejects(self, raw, match):
        with pytest.raises(cli.ConfigError, match=match):
            cli.typed(raw)


class TestRun:
    def test_outputs(self, tmp_path):
        assert run(tmp_path, "plancherel", "--N", "32", "--L", "8") == 0
        lines = (tmp_path / "plancherel.csv").read_text().splitlines()
        assert lines[0].startswith("# schema: dim, N, L")
        rows = list(csv.DictReader(lines[1:]))
        assert len(rows) == 1 and float(rows[0]["plancherel_relerr"]) < 1e-13
        assert "using 2:5" in (tmp_path / "plancherel.gp").read_text()
        m = manifest(tmp_path, "plancherel")
        assert set(m) == {"config", "version", "wall_time_s", "exit_code", "message", "summary"}
        assert m["config"] == {"experiment": "plancherel", "N": 32, "L": 8.0}
        assert m["exit_code"] == 0 and m["summary"]["plancherel_relerr"] < 1e-13

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert run(d, "plancherel", "--N", "16", "--family", "random", "--seed", "7") == 0
        assert (a / "plancherel.csv").read_text() == (b / "plancherel.csv").read_text()

    def test_flags_override_config(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text("N = 16\nL = 6\nwidth = 0.5\n")
        assert run(tmp_path, "plancherel", "--config", str(conf), "--N", "48", "--L", "8") == 0
        assert manifest(tmp_path, "plancherel")["config"] == {"experiment": "plancherel", "N": 48, "L": 8.0, "width": 0.5}

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.ENV_OUT, str(tmp_path / "env"))
        assert cli.main(["run", "plancherel", "--N", "32"]) == 0
        assert (tmp_path / "env" / "plancherel.json").exists()

    def test_list(self, capsys):
        assert cli.main(["list"]) == 0
        assert capsys.readouterr().out.split() == list(cli.EXPERIMENTS)


class TestExitCodes:
    @pytest.mark.parametrize("args,match", [
        (["plancherel", "--N", "33"], "points_per_axis"),
        (["plancherel", "--family", "random"], "seed"),
        (["plancherel", "--family", "noise"], "family"),
        (["no-such-experiment"], "unknown experiment"),
    ])
    def test_validation(self, tmp_path, capsys, args, match):
        assert run(tmp_path, *args) == cli.EXIT_VALIDATION
        assert match in capsys.readouterr().err
        assert manifest(tmp_path, args[0])["exit_code"] == cli.EXIT_VALIDATION

    def test_unknown_config_field(self, tmp_path, capsys):
        conf = tmp_path / "c.conf"
        conf.write_text("colour = blue\n")
        assert run(tmp_path, "plancherel", "--config", str(conf)) == cli.EXIT_VALIDATION
        assert "colour" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert run(tmp_path, "plancherel", "--config", str(tmp_path / "absent")) == cli.EXIT_VALIDATION

    def test_chain_failure(self, tmp_path, monkeypatch):
        def broken(cfg):
            raise ChainError(ChainStep("minkowski", "literal", 2.0, 1.0, anchor="p <= q"))
        monkeypatch.setitem(cli.EXPERIMENTS, "cone-chain", broken)
        assert run(tmp_path, "cone-chain") == cli.EXIT_CHAIN
        m = manifest(tmp_path, "cone-chain")
        assert "minkowski" in m["message"] and not (tmp_path / "cone-chain.csv").exists()

    def test_short_window(self, tmp_path):
        code = run(tmp_path, "anisotropic", "--N", "32", "--L", "8", "--lambdas", "1")
        assert code == cli.EXIT_TAIL
        assert "tail" in manifest(tmp_path, "anisotropic")["message"]
