import json
import os
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from qcdecay import cli

SMALL = {
    "spectrum-density": [],
    "figure1": ["--n", "300", "--delta-e", "20", "--gamma", "1.41", "--seed", "1"],
    "survival": [],
    "ensemble": ["--n", "1000", "--members", "40", "--n-epsilon", "10,30"],
    "rg-flow": ["--steps", "2"],
    "fano": ["--n", "2000", "--grid-points", "301"],
    "cauchy-limit": ["--k-max", "20000", "--n-list", "[4, 16]"],
    "fullrandom": ["--n", "200", "--gamma", "0.5", "--n-states", "3"],
}


def _run(tmp_path, command, *args):
    rc = cli.main([command, "--out-dir", str(tmp_path), *args])
    name = command
    if "--name" in args:
        name = args[list(args).index("--name") + 1]
    summary = None
    path = tmp_path / f"{name}.json"
    if path.exists():
        summary = json.loads(path.read_text())
    return rc, summary, tmp_path / f"{name}.csv"


@pytest.mark.parametrize("command", list(SMALL))
def test_every_subcommand_writes_valid_outputs(tmp_path, command):
    rc, summary, csv = _run(tmp_path, command, *SMALL[command])
    assert rc == 0
    jsonschema.validate(summary, cli.summary_schema())
    assert set(summary) == {"manifest", "derived_params", "metrics"}
    raw = csv.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    lines = raw.decode().splitlines()
    header = lines[0].split(",")
    assert set(summary["manifest"]["csv_units"]) == set(header)
    data = np.loadtxt(csv, delimiter=",", skiprows=1, ndmin=2)
    assert data.shape[1] == len(header) and np.all(np.isfinite(data))
    # shortest round-trip repr: at least 12 significant digits survive
    for row in lines[1:4]:
        for field in row.split(","):
            assert float(field) == float(np.float64(field))


def test_csv_keeps_full_precision(tmp_path):
    cli.write_csv(str(tmp_path / "p.csv"), {"x": np.array([1 / 3, 2.0 ** 0.5])})
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "x"
    assert float(lines[1]) == 1 / 3 and len(lines[1].replace("0.", "").lstrip("0")) >= 12


def test_figure1_example(tmp_path):
    rc, summary, csv = _run(tmp_path, "figure1", *SMALL["figure1"])
    assert rc == 0
    header = csv.read_text().splitlines()[0]
    assert header == "x,phi_step,cauchy_cdf"
    assert summary["derived_params"]["n_gamma"] == pytest.approx(21.15)
    assert summary["metrics"]["ks_distance"] <= 0.15


def test_rerun_is_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    _run(a, "figure1", *SMALL["figure1"])
    _run(b, "figure1", *SMALL["figure1"], "--threads", "2")
    assert (a / "figure1.csv").read_bytes() == (b / "figure1.csv").read_bytes()


def test_regenerate_from_manifest(tmp_path):
    rc, summary, csv = _run(tmp_path / "first", "survival", "--seed", "3", "--n", "400")
    cfg = dict(summary["manifest"]["config"])
    cfg["out_dir"] = str(tmp_path / "second")
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert cli.main(["survival", "--config", str(tmp_path / "cfg.json")]) == 0
    assert (tmp_path / "second" / "survival.csv").read_bytes() == csv.read_bytes()


def test_survival_rate_median_over_seeds(tmp_path):
    rates = []
    for s in range(10):
        rc, summary, _ = _run(tmp_path, "survival", "--seed", str(s))
        assert rc == 0
        rates.append(summary["metrics"]["fitted_rate"])
    assert np.median(rates) == pytest.approx(1.41, rel=0.15)


def test_default_seed_and_threads_recorded(tmp_path):
    rc, summary, _ = _run(tmp_path, "spectrum-density", "--threads", "2")
    m = summary["manifest"]
    assert m["seed"] == 0 and m["config"]["seed"] == 0
    assert m["threads"] == 2
    assert m["backend"] in ("compiled", "python")
    d = summary["derived_params"]
    assert d["epsilon"] == pytest.approx(d["default_epsilon"])
    assert d["default_epsilon"] == pytest.approx((d["omega_b"] * d["gamma"]) ** 0.5)


def test_gamma_and_v2_together_is_config_error(tmp_path, capsys):
    rc, summary, _ = _run(tmp_path, "figure1", "--gamma", "1.41", "--v2", "0.01")
    assert rc == cli.EXIT_CONFIG and summary is None
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "config"
    assert any("only one of gamma and v2" in msg for msg in record["messages"])


def test_all_violations_reported_at_once(capsys, tmp_path):
    rc, _, _ = _run(tmp_path, "figure1", "--delta-e", "-1", "--n", "0", "--threads", "0")
    assert rc == cli.EXIT_CONFIG
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert len(record["messages"]) >= 3


def test_separation_warning(tmp_path, capsys):
    rc, summary, _ = _run(tmp_path, "figure1", "--gamma", "25")
    assert rc == 0
    assert "separation of scales violated" in capsys.readouterr().err
    w = summary["manifest"]["warnings"]
    assert w and "omega_B << Gamma << Delta E" in w[0]


def test_resource_cap_exit_code(tmp_path, capsys):
    rc, _, _ = _run(tmp_path, "rg-flow", "--steps", "8")
    assert rc == cli.EXIT_RESOURCE
    assert json.loads(capsys.readouterr().err.strip())["error"] == "resource_cap"
    rc, _, _ = _run(tmp_path, "fullrandom", "--n", "3000")
    assert rc == cli.EXIT_RESOURCE


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def overflow(cfg, derived):
        np.exp(np.array([1e4]))
        return {}, {}

    monkeypatch.setitem(cli.RUNNERS, "survival", overflow)
    rc, _, _ = _run(tmp_path, "survival")
    assert rc == cli.EXIT_NUMERICAL
    assert json.loads(capsys.readouterr().err.strip())["error"] == "numerical"


def test_config_file_and_flag_override(tmp_path):
    cfg = {"n": 200, "delta_e": 10.0, "gamma": 1.0, "seed": 5, "name": "fromfile"}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    rc, summary, _ = _run(tmp_path, "figure1", "--config", str(path), "--seed", "7", "--name", "fromfile")
    assert rc == 0
    m = summary["manifest"]
    assert m["seed"] == 7 and m["resolved_config"]["n"] == 200
    assert summary["derived_params"]["gamma"] == pytest.approx(1.0)


@pytest.mark.parametrize("content", ['{"n": 300, "bogus": 1}', "{not json", "[1, 2]",
                                     '{"command": "survival"}'])
def test_bad_config_files(tmp_path, content):
    path = tmp_path / "cfg.json"
    path.write_text(content)
    rc, _, _ = _run(tmp_path, "figure1", "--config", str(path))
    assert rc == cli.EXIT_CONFIG


def test_missing_config_file(tmp_path):
    rc, _, _ = _run(tmp_path, "figure1", "--config", str(tmp_path / "nope.json"))
    assert rc == cli.EXIT_CONFIG


def test_fano_validation(tmp_path):
    rc, _, _ = _run(tmp_path, "fano", "--gamma-matrix", "[[1, 0], [0, -1]]")
    assert rc == cli.EXIT_CONFIG
    rc, _, _ = _run(tmp_path, "fano", "--h-a", "[[0, 1], [0, 0]]")
    assert rc == cli.EXIT_CONFIG


def test_usage_error_exit_code():
    assert cli.main(["figure1", "--n", "abc"]) == cli.EXIT_CONFIG
    assert cli.main([]) == cli.EXIT_CONFIG


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qcdecay.cli", "cauchy-limit", "--out-dir", str(tmp_path),
                           "--k-max", "1000", "--v", "2.0"], capture_output=True, text=True)
    assert proc.returncode == cli.EXIT_CONFIG
    assert json.loads(proc.stderr.strip())["error"] == "config"
    assert not os.listdir(tmp_path)
