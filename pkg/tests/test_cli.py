import json

import pytest
import tomli

from prufer_lab import cli

SMALL = """
[run]
seed = 42
runs = 4

[potential]
alpha = 0.3
fourier = [[1, 1.0, 0.0], [-1, 1.0, 0.0]]

[spectrum]
e0 = 1.0
L = 60.0
window_pi = [0.0, 4.0]
"""


def _summary(path):
    doc = json.loads((path / "summary.json").read_text())
    doc.pop("timestamp")
    return doc


def test_spectrum_runs_are_deterministic(tmp_path):
    cfgfile = tmp_path / "exp.toml"
    cfgfile.write_text(SMALL)
    outs = []
    for k, threads in enumerate((1, 1, 2)):
        out = tmp_path / f"o{k}"
        args = ["spectrum", "--config", str(cfgfile), "--seed", "42", "--runs", "4",
                "--threads", str(threads), "--out", str(out)]
        assert cli.main(args) == 0
        outs.append(out)
    assert _summary(outs[0]) == _summary(outs[1]) == _summary(outs[2])
    assert (outs[0] / "atoms.csv").read_bytes() == (outs[2] / "atoms.csv").read_bytes()
    lines = (outs[0] / "atoms.csv").read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert json.loads(lines[0][len("# config: "):])["run"]["seed"] == 42
    assert lines[1] == "seed,atom_index,atom_value"


def test_invalid_toml_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[run]\nruns = = 3\n")
    assert cli.main(["spectrum", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


def test_missing_table_exits_2(tmp_path):
    f = tmp_path / "c.toml"
    f.write_text("[run]\nruns = 1\n")
    assert cli.main(["spectrum", "--config", str(f), "--out", str(tmp_path / "o")]) == 2


def test_unknown_mode_exits_2():
    assert cli.main(["nonsense", "--config", "x.toml"]) == 2


@pytest.mark.parametrize("name", ["poisson_alpha03.toml", "sinebeta_crossover.toml", "explosion_ad.toml",
                                  "jumpfield_2d.toml", "coupling_mode.toml"])
def test_presets_load(name):
    cfg = cli.load_config(name)
    assert cfg["run"]["runs"] >= 1


def test_coupling_preset_is_constant_mode():
    cfg = cli.load_config("coupling_mode.toml")
    assert cfg["potential"]["profile"] == "constant"
    assert cfg["potential"]["scale"] == pytest.approx(400.0**-0.3)


def test_explosion_mode(tmp_path):
    f = tmp_path / "e.toml"
    f.write_text("[explosion]\nc_n = [20.0]\nlambda_pi = [1.0]\nr = [0.0]\n")
    assert cli.main(["explosion", "--config", str(f), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[1] == "C_n,lambda,r,mean_time,limit_value"
    assert float(lines[2].split(",")[3]) == pytest.approx(0.5, rel=1e-7)


def test_sine_beta_mode(tmp_path):
    assert cli.main(["sine-beta", "--config", "sinebeta_crossover.toml", "--runs", "30",
                     "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["runs"] == 30 and doc["config"]["sine_beta"]["beta"] == 0.05


def test_jumpfield_and_phase_modes(tmp_path):
    cfg = tomli.loads(SMALL)
    body = SMALL + "\n[jumpfield]\nn = 60.0\nlambda_grid_pi = [0.0, 1.0, 2.0]\n" \
                   "\n[phase]\nL = 60.0\nlambdas_pi = [1.0]\nrecord_every = 100\n"
    f = tmp_path / "j.toml"
    f.write_text(body)
    assert cfg["run"]["runs"] == 4
    assert cli.main(["jumpfield", "--config", str(f), "--runs", "2", "--out", str(tmp_path / "j")]) == 0
    assert (tmp_path / "j" / "rectangles.csv").exists()
    assert cli.main(["phase", "--config", str(f), "--runs", "2", "--out", str(tmp_path / "p")]) == 0
    assert (tmp_path / "p" / "phases.csv").read_text().splitlines()[1] == "run,lambda,Theta_L,phi"


def test_limit_sde_mode(tmp_path):
    f = tmp_path / "s.toml"
    f.write_text('[sde]\nc_n = 20.0\nlambda_pi = 1.0\nalpha = 0.3\nkind = "riccati"\nhorizon = 2.0\n')
    assert cli.main(["limit-sde", "--config", str(f), "--runs", "3", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["runs"] == 3 and 0 <= doc["exploded"] <= 3
    assert (tmp_path / "explosions.csv").read_text().splitlines()[1] == "run,explosion_index,time"


def test_report_mode(tmp_path):
    f = tmp_path / "r.toml"
    f.write_text("[report]\ncriteria = [10]\n")
    code = cli.main(["report", "--config", str(f), "--out", str(tmp_path)])
    doc = json.loads((tmp_path / "report.json").read_text())
    assert code == (0 if doc["all_pass"] else 1)
    assert doc["criteria"][0]["criterion"] == 10
