import json
import subprocess
import sys

import pytest

from bifbm import cli, pathio
from bifbm.errors import ConfigError


def test_simulate_writes_paths(tmp_path):
    out = tmp_path / "sim"
    code = cli.main(["simulate", "--h", "0.6", "--k", "0.5", "--grid-n", "64", "--paths", "2",
                     "--format", "both", "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["command"] == "simulate" and "out" not in doc["config"]
    assert sorted(doc["artifacts"]) == doc["artifacts"]
    assert (out / "path_00000.csv").exists() and (out / "path_00001.bin").exists()
    p = pathio.read_binary(out / "path_00001.bin")
    assert p.values.shape == (65, 1) and p.t[0] == 0.0 and p.params.h == 0.6


def test_grid_n_zero_is_config_error(tmp_path, capsys):
    code = cli.main(["simulate", "--grid-n", "0", "--out", str(tmp_path)])
    assert code == cli.EXIT_CONFIG
    assert "grid must be nonempty" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["simulate", "--h", "1.2"],
    ["simulate", "--k", "0"],
    ["localtime", "--paths", "0"],
    ["chaos", "--alpha", "-1"],
    ["report-all", "--only", "no_such_check"],
])
def test_invalid_configs(tmp_path, args):
    extra = ["--out-dir" if args[0] == "report-all" else "--out", str(tmp_path)]
    assert cli.main(args + extra) == cli.EXIT_CONFIG


def test_unknown_subcommand_and_flag():
    assert cli.main(["nonsense"]) == 2
    assert cli.main(["verify", "--bogus", "1"]) == 2


def test_config_file_precedence(tmp_path):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"h": 0.3, "k": 0.5, "grid_n": 16}))
    cfg = cli.merge_config("simulate", json.loads(cfgf.read_text()), {"k": 0.9})
    assert (cfg.h, cfg.k, cfg.grid_n, cfg.paths) == (0.3, 0.9, 16, 1)
    with pytest.raises(ConfigError, match="unknown config field"):
        cli.merge_config("simulate", {"colour": 1}, {})
    with pytest.raises(ConfigError):
        cli.merge_config("simulate", {"command": "chaos"}, {})
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert cli.main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_verify_fbm_lattice_passes_and_is_byte_identical(tmp_path):
    lat = tmp_path / "lat.json"
    lat.write_text(json.dumps([[0.5, 1.0]]))
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["verify", "--lattice", str(lat), "--out", str(a)]) == 0
    assert cli.main(["verify", "--lattice", str(lat), "--out", str(b)]) == 0
    ra = (a / "report.json").read_bytes()
    assert ra == (b / "report.json").read_bytes()
    doc = json.loads(ra)
    assert doc["summary"]["fail"] == 0 and doc["summary"]["pass"] > 0
    assert any("fbm" in r["name"] for r in doc["records"])


def test_verify_default_lattice(tmp_path):
    assert cli.main(["verify", "--out", str(tmp_path)]) == 0


def test_spectrum_localtime_dimension_chaos(tmp_path):
    assert cli.main(["spectrum", "--h", "0.6", "--k", "0.5", "--n-lambda", "5", "--out", str(tmp_path / "s")]) == 0
    rows = (tmp_path / "s" / "spectrum.csv").read_text().splitlines()
    assert len(rows) == 6
    assert cli.main(["localtime", "--grid-n", "1024", "--paths", "5", "--out", str(tmp_path / "l")]) == 0
    assert (tmp_path / "l" / "localtime.csv").exists()
    assert cli.main(["dimension", "--target", "graph", "--grid-n", "4096", "--paths", "2",
                     "--out", str(tmp_path / "d")]) == 0
    assert cli.main(["chaos", "--order-cap", "4",
                     "--out", str(tmp_path / "c")]) == 0
    head = (tmp_path / "c" / "chaos_terms.csv").read_text().splitlines()
    assert head[0].startswith("m,") and len(head) == 6


def test_compute_error_exit(tmp_path):
    # circulant embedding fails for HK near 1 on a long log grid
    code = cli.main(["simulate", "--method", "lamperti", "--h", "0.9375", "--k", "0.8",
                     "--grid-n", "65536", "--out", str(tmp_path)])
    assert code == cli.EXIT_COMPUTE


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["spectrum", "--n-lambda", "3", "--out", str(blocker / "sub")]) == cli.EXIT_COMPUTE


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "bifbm.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "report-all" in out.stdout
