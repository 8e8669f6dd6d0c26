import csv
import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("MFGLQ_CLI", "mfglq")

PRESET = {
    "dims": {"n": 1, "k": 1, "N": 50},
    "grid": {"T": 1.0, "M": 200},
    "dynamics": {"A": -0.4, "B": 0.5, "E": 0.3, "C": 0.0, "D": 0.1, "F": 0.0,
                 "Ctilde": 0.1, "Dtilde": 0.0, "Ftilde": 0.0, "f": [-2.0], "g": [0.5], "gtilde": [0.5]},
    "cost": {"Q": 1.0, "R": 10.0, "Gamma1": 1.0, "eta1": [0.0], "eta2": [6.0],
             "G": 1.0, "Gamma0": 0.0, "eta0": [2.5]},
    "initial": {"kind": "uniform", "lower": [2.5], "upper": [3.5]},
    "seed": 7,
}


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)


def write_config(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def column(path, name):
    with open(path) as fh:
        return [float(r[name]) for r in csv.DictReader(fh)]


def test_bad_config_path(tmp_path):
    assert run("riccati", "--config", tmp_path / "missing.json", "--out", tmp_path / "o").returncode == 1


def test_malformed_config(tmp_path):
    bad = dict(PRESET, dims={"n": 1, "k": 1, "N": 1})
    assert run("riccati", "--config", write_config(tmp_path, bad), "--out", tmp_path / "o").returncode == 1


def test_zero_agents_is_usage_error(tmp_path):
    cfg = write_config(tmp_path, PRESET)
    assert run("simulate", "--config", cfg, "--out", tmp_path / "o", "--n", 0).returncode == 1


def test_riccati_outputs(tmp_path):
    out = tmp_path / "o"
    r = run("riccati", "--config", write_config(tmp_path, PRESET), "--out", out)
    assert r.returncode == 0, r.stderr
    for name in ["P", "K", "Pi", "S", "M", "phi", "psi"]:
        assert (out / f"{name}_limit.csv").exists()
    assert (out / "P_50.csv").exists()
    assert (out / "fig1_riccati.svg").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "riccati"
    files = {a["file"] for a in manifest["artifacts"]}
    assert "fig1_riccati.csv" in files
    assert all(len(a["hash"]) == 16 for a in manifest["artifacts"])


def test_decoupled_curves_vanish(tmp_path):
    cfg = json.loads(json.dumps(PRESET))
    cfg["dynamics"].update(E=0.0, F=0.0, Ftilde=0.0, f=[0.0], g=[0.0], gtilde=[0.0])
    cfg["cost"].update(Gamma1=0.0, Gamma0=0.0, eta0=[0.0], eta1=[0.0], eta2=[0.0])
    out = tmp_path / "o"
    assert run("riccati", "--config", write_config(tmp_path, cfg), "--out", out).returncode == 0
    for name in ["K", "Pi", "M"]:
        assert all(v == 0.0 for v in column(out / f"{name}_limit.csv", name))


def test_unsolvable_config_exit_code(tmp_path):
    cfg = json.loads(json.dumps(PRESET))
    cfg["cost"]["R"] = -10.0
    r = run("riccati", "--config", write_config(tmp_path, cfg), "--out", tmp_path / "o")
    assert r.returncode == 2
    assert "t = 1" in r.stderr


def test_simulate_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, PRESET)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("simulate", "--config", cfg, "--out", a, "--scenarios", 1, "--seed", 3).returncode == 0
    assert run("simulate", "--config", cfg, "--out", b, "--scenarios", 1, "--seed", 3).returncode == 0
    for f in ["trajectories.csv", "fig2_controls.csv", "fig3_states.csv", "fig4_mean_field.csv", "fig4_mean_field.svg"]:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_seed_changes_paths_not_riccati(tmp_path):
    cfg = write_config(tmp_path, PRESET)
    outs = {}
    for seed in (7, 8):
        out = tmp_path / f"s{seed}"
        assert run("riccati", "--config", cfg, "--out", out, "--seed", seed).returncode == 0
        assert run("simulate", "--config", cfg, "--out", out, "--scenarios", 1, "--seed", seed).returncode == 0
        outs[seed] = out
    assert (outs[7] / "P_limit.csv").read_bytes() == (outs[8] / "P_limit.csv").read_bytes()
    assert (outs[7] / "trajectories.csv").read_bytes() != (outs[8] / "trajectories.csv").read_bytes()


def test_step_refinement(tmp_path):
    cfg = json.loads(json.dumps(PRESET))
    cfg["grid"]["M"] = 1000
    p = write_config(tmp_path, cfg)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("riccati", "--config", p, "--out", a).returncode == 0
    assert run("riccati", "--config", p, "--out", b, "--steps", 2000).returncode == 0
    assert abs(column(a / "P_limit.csv", "P")[0] - column(b / "P_limit.csv", "P")[0]) < 1e-8


def test_fault_injection_fails_identity(tmp_path):
    out = tmp_path / "o"
    r = run("verify", "--config", write_config(tmp_path, PRESET), "--out", out, "--scenarios", 8,
            "--n-list", "25,50", "--gap-list", "8,16", "--deviation-list", "50,100", "--fault-k-terminal", 1e-3)
    assert r.returncode == 3
    report = json.loads((out / "verify.json").read_text())
    assert report["method_identity"]["pass"] is False
    assert report["method_identity"]["K"] >= 1e-3
    assert report["pass"] is False
