import json
import subprocess
import sys

import pytest

from mzi_twophase.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main

SMALL = '[run]\nrepetitions = 4\n[sweep]\nvalues = [200, 400]\n'


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL)
    return path


def test_fig2_run_writes_outputs(tmp_path, config, capsys):
    out = tmp_path / "out"
    assert main(["run", "fig2", "--config", str(config), "--out", str(out), "--seed", "5"]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["fig2.csv", "fig2.meta.json", "fig2.svg"]
    meta = json.loads((out / "fig2.meta.json").read_text())
    assert meta["seed"] == 5 and meta["config"]["run"]["repetitions"] == 4
    assert str(out / "fig2.csv") in capsys.readouterr().out


def test_config_errors(tmp_path, config, capsys):
    assert main(["run", "custom", "--out", str(tmp_path)]) == EXIT_CONFIG
    bad = tmp_path / "bad.toml"
    bad.write_text("[run]\nnu = -3\n")
    assert main(["run", "fig2", "--config", str(bad)]) == EXIT_CONFIG
    assert "run.nu" in capsys.readouterr().err
    assert main(["run", "fig2", "--config", str(config), "--seed", "-1"]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as err:
        main(["run", "fig9"])
    assert err.value.code == EXIT_CONFIG


def test_io_errors(tmp_path, config):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "fig2", "--config", str(config), "--out", str(blocker / "x")]) == EXIT_IO
    assert main(["run", "fig2", "--config", str(tmp_path / "missing.toml")]) == EXIT_IO


def test_numerical_failure(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(
        '[probe]\nr = 0.0\n[lo]\nmode = "explicit"\ntheta1 = 0.3\ntheta2 = 0.4\n'
        '[run]\nestimator = "closed_form"\nrepetitions = 3\n[sweep]\nvalues = [100]\n'
    )
    assert main(["run", "custom", "--config", str(path), "--out", str(tmp_path)]) == EXIT_NUMERIC


def test_module_entry_point(tmp_path, config):
    res = subprocess.run(
        [sys.executable, "-m", "mzi_twophase", "run", "fig2", "--config", str(config), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        env={"MPLBACKEND": "", "PATH": "/usr/bin:/bin"},
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "fig2.svg").exists()
