import csv
import json
import subprocess
import sys

import pytest

from rfspin.cli import main
from rfspin.config import ConfigError, ExperimentConfig, default_config
from rfspin.report import build_report


def _run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def _small(task, **task_over):
    cfg = default_config(task)
    cfg["disorder"]["n_samples"] = 400
    cfg["task"].update(task_over)
    return cfg


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_largen_json(tmp_path, capsys):
    assert _run(tmp_path, "largen") == 0
    doc = json.loads((tmp_path / "largen.json").read_text())
    assert doc["exponents"] == {"eta": 0.1, "etaBar": 0.1, "etaPrime": 0.1}
    assert {"input", "coefficients", "checks"} <= set(doc)
    assert all({"name", "lhs", "rhs", "pass"} <= set(c) for c in doc["checks"])
    assert "verdict: HOLDS" in capsys.readouterr().out


def test_saddle_completed(tmp_path):
    assert _run(tmp_path, "saddle", "--format", "csv") == 0
    rows = list(csv.DictReader((tmp_path / "saddle.csv").open()))
    assert float(rows[0]["residual"]) < 1e-10


def test_check_subcommands(tmp_path):
    for task in ("check-ss", "check-theorem"):
        p = _write(tmp_path, _small(task), f"{task}.json")
        assert _run(tmp_path, task, "--config", p) == 0
        doc = json.loads((tmp_path / f"{task.replace('-', '_')}.json").read_text())
        assert doc["verdict"] == "HOLDS" and len(doc["values"]) == 3
        assert doc["seeds"] == {"disorder_base_seed": 0}


def test_l_zero_rejected(tmp_path, capsys):
    p = _write(tmp_path, _small("check-theorem", l=0))
    assert _run(tmp_path, "check-theorem", "--config", p) == 1
    assert "l = 0" in capsys.readouterr().err


def test_bad_inputs(tmp_path, capsys):
    assert _run(tmp_path, "check-ss", "--samples", "1") == 1
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert _run(tmp_path, "check-ss", "--config", str(p)) == 1
    p2 = _write(tmp_path, _small("check-ss"))
    assert _run(tmp_path, "saddle", "--config", p2) == 1
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 1


def test_violated_exit_code(tmp_path):
    cfg = default_config("largen")
    cfg["task"]["N"] = 4
    assert _run(tmp_path, "largen", "--config", _write(tmp_path, cfg)) == 2


def test_inconclusive_exit_code(tmp_path):
    cfg = default_config("largen")
    cfg["task"].update(N=2, q=[0.001])
    assert _run(tmp_path, "largen", "--config", _write(tmp_path, cfg)) == 3


def test_gamma_path_csv(tmp_path):
    cfg = _small("gamma-path", t={"n": 3}, inner={"mode": "gauss_hermite", "nodes_per_dim": 4})
    cfg["disorder"]["n_samples"] = 10
    assert _run(tmp_path, "gamma-path", "--config", _write(tmp_path, cfg), "--format", "csv") in (0, 3)
    rows = list(csv.reader((tmp_path / "gamma_path.csv").open()))
    assert rows[0] == ["t", "gamma", "stderr", "dgamma_lemma1", "stderr"]
    assert len(rows) == 4


def test_taylor_and_simulate_subcommands(tmp_path):
    cfg = _small("lemma2", inner={"mode": "gauss_hermite", "nodes_per_dim": 4})
    cfg["disorder"]["n_samples"] = 10
    assert _run(tmp_path, "lemma2", "--config", _write(tmp_path, cfg)) in (0, 3)
    assert _run(tmp_path, "simulate", "--format", "csv") == 0
    rows = list(csv.DictReader((tmp_path / "simulate.csv").open()))
    assert len(rows) == 4 and all(abs(float(r["mean"])) <= 1 for r in rows)


def test_byte_identical_reruns(tmp_path):
    p = _write(tmp_path, _small("check-theorem"))
    a, b = tmp_path / "a", tmp_path / "b"
    main(["check-theorem", "--config", p, "--seed", "17", "--out", str(a)])
    main(["check-theorem", "--config", p, "--seed", "17", "--out", str(b), "--workers", "8"])
    assert (a / "check_theorem.json").read_bytes() == (b / "check_theorem.json").read_bytes()
    main(["check-theorem", "--config", p, "--seed", "18", "--out", str(b)])
    assert (a / "check_theorem.json").read_bytes() != (b / "check_theorem.json").read_bytes()


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("RFSPIN_OUT", str(tmp_path / "env"))
    assert main(["saddle"]) == 0
    assert (tmp_path / "env" / "saddle.json").exists()


def test_empty_report_is_inconclusive():
    cfg = ExperimentConfig(default_config("simulate"))
    doc = build_report(cfg, {"values": []})
    assert doc["values"] == [] and doc["verdict"] == "INCONCLUSIVE"


def test_config_roundtrip_and_digest(tmp_path):
    cfg = ExperimentConfig(default_config("check-ss"))
    cfg.save(tmp_path / "c.json")
    back = ExperimentConfig.load(tmp_path / "c.json")
    assert back.data == cfg.data and back.digest == cfg.digest
    assert cfg.with_overrides(seed=3).digest != cfg.digest
    with pytest.raises(ConfigError):
        ExperimentConfig({"task": {"name": "bogus"}})
    bad = default_config("check-ss")
    bad["engine"]["variant"] = "quantum"
    with pytest.raises(ConfigError):
        ExperimentConfig(bad)


def test_seed_override_reaches_inner_stream():
    cfg = default_config("gamma-path")
    cfg["task"]["inner"] = {"mode": "montecarlo", "n_inner": 8}
    out = ExperimentConfig(cfg).with_overrides(seed=5)
    assert out.seeds() == {"disorder_base_seed": 5, "inner_base_seed": 5}


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "rfspin", "saddle", "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and "verdict: COMPLETED" in r.stdout
