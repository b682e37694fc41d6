import json
import subprocess
import sys

import pytest

from dilatlt import cli

CONFIG = """
[grid]
L = 16.0
N = 128

[verify]
gammas = [1.0, 1.5]
kappas = [1.0, "inf"]
checks = ["main", "corollary_total", "count", "flls_cone", "real_lt"]

[[potential]]
name = "well"
terms = [{ family = "sech_squared", c = [-2.0, 0.0] }]

[[potential]]
name = "complex"
terms = [{ family = "sech_squared", c = [-6.0, 0.5] }]
"""


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "runs.toml"
    p.write_text(CONFIG)
    return p


def _dirs(out, prefix):
    return sorted(d for d in out.iterdir() if d.name.startswith(prefix))


def test_constants(capsys, tmp_path):
    assert cli.main(["constants", "--gamma", "1.5", "--kappa", "2", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "L_cl=0.1875" in text and "C=0.75" in text
    rows = json.loads((tmp_path / "constants.json").read_text())
    assert rows[0]["lt_mode"] == "classical_sharp"


def test_usage_errors(tmp_path, capsys):
    assert cli.main(["constants", "--gamma", "0.3"]) == cli.EXIT_USAGE
    assert cli.main(["spectrum"]) == cli.EXIT_USAGE
    assert cli.main(["spectrum", "--config", str(tmp_path / "missing.toml")]) == cli.EXIT_USAGE
    bad = tmp_path / "bad.toml"
    bad.write_text('[[potential]]\nname = "g"\nbetas = [0.3, 0.9]\n'
                   'terms = [{ family = "gaussian", c = -1.0 }]\n')
    assert cli.main(["spectrum", "--config", str(bad)]) == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == cli.EXIT_USAGE


def test_spectrum_and_cache(config, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["spectrum", "--config", str(config), "--out", str(out)]) == 0
    dirs = _dirs(out, "spectrum-")
    assert len(dirs) == 2
    first = {d.name: (d / "spectrum.csv").read_bytes() for d in dirs}
    for d in dirs:
        assert {"config.json", "summary.txt", "meta.json", "DONE", "spectrum.csv", "spectrum.json",
                "multiplicity.json", "plot.txt"} <= {p.name for p in d.iterdir()}
    capsys.readouterr()
    assert cli.main(["spectrum", "--config", str(config), "--out", str(out)]) == 0
    assert "(cached)" in capsys.readouterr().out
    assert cli.main(["spectrum", "--config", str(config), "--out", str(out), "--no-cache"]) == 0
    again = {d.name: (d / "spectrum.csv").read_bytes() for d in _dirs(out, "spectrum-")}
    assert again == first


def test_tol_changes_hash(config, tmp_path):
    out = tmp_path / "out"
    cli.main(["classify", "--config", str(config), "--out", str(out)])
    cli.main(["classify", "--config", str(config), "--out", str(out), "--tol", "1e-5"])
    assert len(_dirs(out, "classify-")) == 4


def test_classify_theta_override(config, tmp_path):
    out = tmp_path / "out"
    code = cli.main(["classify", "--config", str(config), "--out", str(out),
                     "--theta1", "0", "0.4", "--theta2", "0.2", "0.4"])
    assert code == 0
    cfg = json.loads((_dirs(out, "classify-")[0] / "config.json").read_text())
    assert cfg["theta1"] == [0.0, 0.4]


def test_verify(config, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["verify", "--config", str(config), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "VIOLATED" not in text
    assert "real_lt skipped" in text
    for d in _dirs(out, "verify-"):
        reports = json.loads((d / "report.json").read_text())
        assert reports and all(r["holds"] in (True, None) for r in reports)


def test_multiplicity_and_sweep(config, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["multiplicity", "--config", str(config), "--out", str(out)]) == 0
    recs = json.loads((_dirs(out, "multiplicity-")[0] / "multiplicity.json").read_text())
    assert all(r["m"] == 1 for r in recs)
    sweep = config.read_text() + "\n[sweep]\nbetas = [0.3, 0.4, 0.5]\ngrids = [[16.0, 64], [16.0, 128]]\n"
    config.write_text(sweep)
    assert cli.main(["sweep", "--config", str(config), "--out", str(out)]) == 0
    text = (_dirs(out, "sweep-")[0] / "sweep.txt").read_text().splitlines()
    assert text[0] == "L N beta value_re value_im drift" and len(text) > 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "dilatlt", "constants", "--gamma", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "dll_bound" in r.stdout
