import csv
import json
import subprocess
import sys

import pytest

from thermvs.charlib import load_charlib, synth_charlib
from thermvs.cli import RunConfig, main
from thermvs.optimizer import VidLut

SMALL = {"synth_design": {"m": 3, "n": 3, "paths": 8, "seed": 4}, "theta_ja": 12.0}


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "thermvs", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd)


def config(tmp_path, **extra):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({**SMALL, **extra}))
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_characterize_round_trip_and_bytes(tmp_path):
    for out in ("a", "b"):
        assert run("characterize", "--seed", 0, "--out", tmp_path / out).returncode == 0
    a, b = (tmp_path / d / "charlib.json" for d in ("a", "b"))
    assert a.read_bytes() == b.read_bytes()
    assert load_charlib(a) == synth_charlib(0)


def test_characterize_bad_output_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    r = run("characterize", "--out", blocker)
    assert r.returncode == 2 and "not a directory" in r.stderr


def test_scale_sweep(tmp_path):
    cfg = config(tmp_path, t_amb_sweep=list(range(0, 90, 5)), t_amb=40)
    r = run("scale", "--config", cfg, "--out", tmp_path / "o")
    assert r.returncode == 0, r.stderr
    out = tmp_path / "o"
    rows = read_csv(out / "voltages.csv")
    assert len(rows) == 18 and list(rows[0]) == ["t_amb_c", "v_core_mv", "v_bram_mv"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["rows"] == 18 and summary["v_core_nondecreasing"]
    cores = [int(x["v_core_mv"]) for x in rows]
    assert summary["v_core_nondecreasing"] == (cores == sorted(cores))

    power = read_csv(out / "power.csv")
    assert list(power[0]) == ["t_amb_c", "alpha_in", "p_baseline_w", "p_opt_w", "saving_pct"]
    assert len(power) == 36
    assert all(float(p["p_opt_w"]) <= float(p["p_baseline_w"]) for p in power)

    trace = read_csv(out / "trace.csv")
    assert list(trace[0]) == ["iteration", "v_core_mv", "v_bram_mv", "power_w", "t_junct_c"]
    assert [int(t["iteration"]) for t in trace] == list(range(1, len(trace) + 1))


def test_scale_with_oracle(tmp_path):
    r = run("scale", "--config", config(tmp_path), "--oracle", "--out", tmp_path / "o")
    assert r.returncode == 0
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["oracle_agrees"] is True


def test_empty_design_file(tmp_path):
    empty = tmp_path / "design.json"
    empty.write_text("")
    r = run("scale", "--design", empty, "--out", tmp_path / "o")
    assert r.returncode == 3 and "parse" in r.stderr


def test_junction_cap_exit(tmp_path):
    cfg = config(tmp_path, theta_ja=200.0, t_amb=90)
    r = run("scale", "--config", cfg, "--out", tmp_path / "o")
    assert r.returncode == 4 and "exceeds 100" in r.stderr


def test_config_errors(tmp_path):
    assert run("scale", "--config", tmp_path / "missing.json").returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    assert run("scale", "--config", bad).returncode == 3
    bad.write_text(json.dumps({"betas": [0.5]}))
    assert run("overscale", "--config", bad).returncode == 3
    bad.write_text(json.dumps({"design": "nowhere.json"}))
    assert run("scale", "--config", bad).returncode == 3
    assert run("frobnicate").returncode == 2


def test_energy_report(tmp_path):
    out = tmp_path / "o"
    assert run("energy", "--config", config(tmp_path, v_step_mv=50), "--out", out).returncode == 0
    (row,) = read_csv(out / "energy.csv")
    assert list(row) == ["v_core_mv", "v_bram_mv", "freq_ratio", "energy_j", "saving_pct"]
    assert float(row["freq_ratio"]) < 1 and float(row["saving_pct"]) > 0
    summary = json.loads((out / "energy_summary.json").read_text())
    assert float(row["energy_j"]) < summary["baseline_energy_j"]


def test_energy_no_prune(tmp_path):
    out = tmp_path / "o"
    assert run("energy", "--config", config(tmp_path, v_step_mv=50), "--no-prune", "--out", out).returncode == 0
    stats = json.loads((out / "energy_summary.json").read_text())["stats"]
    assert stats["pruned"] == 0 and stats["cache_hits"] == 0


def test_overscale_report(tmp_path):
    out = tmp_path / "o"
    assert run("overscale", "--config", config(tmp_path), "--out", out).returncode == 0
    rows = read_csv(out / "overscale.csv")
    assert list(rows[0]) == ["beta", "power_w", "violating_path_count", "max_deficit_s"]
    assert rows[0]["beta"] == "1" and rows[0]["violating_path_count"] == "0"
    detail = read_csv(out / "violations.csv")
    assert len(detail) == sum(int(r["violating_path_count"]) for r in rows)


def test_lut_round_trip(tmp_path):
    out = tmp_path / "o"
    assert run("lut", "--config", config(tmp_path, lut_keys=[0, 30, 60]), "--out", out).returncode == 0
    lut = VidLut.from_csv(out / "lut.csv")
    assert lut.keys == [0.0, 30.0, 60.0]


def test_oracle_check(tmp_path):
    out = tmp_path / "o"
    assert run("oracle-check", "--config", config(tmp_path), "--out", out).returncode == 0
    assert json.loads((out / "oracle.json").read_text())["agree"] is True


def test_relative_paths_resolve_against_config(tmp_path):
    from thermvs.design import gen_synthetic_design, save_design
    save_design(gen_synthetic_design(2, 3, 4, 0), tmp_path / "d.json")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"design": "d.json", "out_dir": str(tmp_path / "o")}))
    assert main(["scale", "--config", str(cfg)]) == 0
    assert RunConfig.from_file(cfg).design == str(tmp_path / "d.json")
