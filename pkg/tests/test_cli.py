import functools
import json
import shutil
import subprocess

import pytest

from expray import cli, rays
from expray.cli import main, parse_complex
from expray.io import read_ray_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_address_command(capsys):
    code, data = run_json(capsys, "address", "p:|0")
    assert code == 0 and data["t_s"] == 0.0 and data["exact"] and data["speed"] == "slow"
    code, data = run_json(capsys, "address", "--address", "f:2.0")
    assert code == 0 and abs(data["t_s"] - 2) < 1e-9 and data["speed"] == "fast"
    code, _, err = run(capsys, "address", "p:1,2|")
    assert code == 2 and "period" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "ray-dyn", "--address", "p:|0")[0] == 2          # no kappa
    assert run(capsys, "classify", "--kappa", "x,y")[0] == 2
    assert run(capsys, "ray-par", "--address", "p:|1", "--t-lo", "0")[0] == 2


def test_classify(capsys):
    code, data = run_json(capsys, "classify", "--kappa", "-2,0")
    assert code == 5 and data["error"] == "NotEscaping" and data["verdict"]["kind"] == "bounded"
    code, data = run_json(capsys, "classify", "--kappa", "0,0")
    assert code == 0 and data["address"] == "p:|0"


def test_endpoint(capsys, tmp_path):
    code, data = run_json(capsys, "endpoint", "--address", "p:|1")
    assert code == 5 and data["error"] == "NotFastAddress"
    out = tmp_path / "end.json"
    code, data = run_json(capsys, "endpoint", "--address", "f:1.0", "--out", str(out))
    assert code == 0 and data["residual"] < 1e-8
    assert json.loads(out.read_text())["kappa"] == data["kappa"]


def test_ray_par(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "ray-par", "--address", "p:|0", "--t-lo", "1", "--t-hi", "10",
                     "--samples", "20", "--out", str(out))
    rows = read_ray_csv(out)
    assert code == 0 and len(rows) == 20
    assert all(abs(r["im"]) < 1e-12 for r in rows)
    assert (tmp_path / "r.json").exists()


def test_ray_dyn_exit_codes(capsys, tmp_path, monkeypatch):
    out = tmp_path / "d.csv"
    code, data = run_json(capsys, "ray-dyn", "--address", "p:|1", "--kappa", "0,0",
                          "--t-lo", "0.5", "--t-hi", "10", "--out", str(out))
    assert code == 0 and data["truncation"]["kind"] == "complete"
    code, data = run_json(capsys, "ray-dyn", "--address", "p:|0", "--kappa", "0,0",
                          "--t-lo", "0.5", "--t-hi", "10", "--out", str(out))
    assert code == 3 and data["truncation"]["kind"] == "premature_end"
    assert out.exists() and read_ray_csv(out)
    # a one-level pullback cannot meet a tiny tolerance: every sample fails
    monkeypatch.setattr(cli.rays, "trace_ray", functools.partial(rays.trace_ray, depth_hint=1))
    code, data = run_json(capsys, "ray-dyn", "--address", "p:|1", "--kappa", "0.3,0",
                          "--t-lo", "0.2", "--t-hi", "0.3", "--samples", "3", "--eps", "1e-15")
    assert code == 4 and data["failures"] == 3


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"address": "p:|0", "t-lo": 2.0, "t_hi": 5.0, "samples": 7}))
    out = tmp_path / "p.csv"
    code, _, _ = run(capsys, "ray-par", "--config", str(cfg), "--samples", "4", "--out", str(out))
    rows = read_ray_csv(out)
    assert code == 0 and len(rows) == 4
    assert rows[0]["t"] == 5.0 and rows[-1]["t"] == 2.0
    cfg.write_text(json.dumps({"address": "p:|0", "colour": "red"}))
    code, _, err = run(capsys, "ray-par", "--config", str(cfg))
    assert code == 2 and "colour" in err
    cfg.write_text("[1, 2]")
    assert run(capsys, "ray-par", "--config", str(cfg))[0] == 2


def test_render_commands_reproducible(capsys, tmp_path, monkeypatch):
    a, b, c = tmp_path / "a.ppm", tmp_path / "b.ppm", tmp_path / "c.csv"
    args = ["render-par", "--grid", "0,0,8,8,30,20", "--budget", "100", "--overlay", "p:|0",
            "--t-lo", "0.5", "--t-hi", "10"]
    assert run(capsys, *args, "--out", str(a), "--counts", str(c))[0] == 0
    monkeypatch.setenv("EXPRAY_THREADS", "8")
    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(c.read_text().splitlines()) == 20
    d = tmp_path / "d.ppm"
    code, data = run_json(capsys, "render-dyn", "--kappa", "-0.5,0", "--grid", "-1,0,6,6,16,16",
                          "--budget", "100", "--out", str(d))
    assert code == 0 and data["pixels"] == 256 and d.read_bytes().startswith(b"P6\n16 16\n")


def test_parse_complex():
    assert parse_complex("1,-2") == 1 - 2j
    assert parse_complex("-2") == -2
    assert parse_complex([0.5, 1]) == 0.5 + 1j
    assert parse_complex("1+2i") == 1 + 2j


@pytest.mark.skipif(shutil.which("expray") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["expray", "address", "f:1.0", "--json"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["speed"] == "fast"
