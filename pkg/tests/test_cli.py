import json
import os
import subprocess
import sys

import pytest

from fblris import bounds, selftest
from fblris.cli import main
from fblris.special_fn import q_inv

SMALL = ["--samples", "5000", "--seed", "7"]


def _run(args, threads=None):
    env = dict(os.environ)
    if threads is not None:
        env["FBLRIS_THREADS"] = str(threads)
    return subprocess.run([sys.executable, "-m", "fblris", *args], capture_output=True, env=env, text=True)


@pytest.mark.parametrize("args", [
    ["moments", "--preset", "fig3-qpsk"],
    ["curve", "--preset", "fig1", "--n-min", "50", "--n-max", "500", "--n-step", "50"],
    ["rate-vs-snr", "--preset", "fig8", "--snr-min", "-10", "--snr-max", "10", "--snr-step", "5"],
    ["capacity", "--t", "3", "--r", "2"],
])
def test_output_identical_across_threads(args):
    a = _run(args + SMALL, threads=1)
    b = _run(args + SMALL, threads=3)
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout
    assert a.stdout.startswith("# fblris")


def test_out_file_and_json(tmp_path):
    path = tmp_path / "m.json"
    assert main(["moments", "--preset", "fig1", "--format", "json", "--out", str(path)] + SMALL) == 0
    doc = json.loads(path.read_text())
    assert doc["command"] == "moments"
    assert doc["spec"]["seed"] == 7
    assert doc["records"][0]["scheme"] == "bpsk"


def test_curve_csv_columns(tmp_path, capsys):
    assert main(["curve", "--preset", "fig1-bpsk", "--n-min", "50", "--n-max", "100", "--n-step", "50"] + SMALL) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[0] == "n,ach_rate,ach_refined,conv_rate,capacity"
    assert len(lines) == 3


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = fig6\nscheme = qpsk\nsamples = 5000\nseed = 7\n")
    assert main(["moments", "--config", str(cfg), "--snr-db", "0"]) == 0
    row = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")][1].split(",")
    assert row[:5] == ["3", "2", "4", "0.0", "qpsk"]


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    assert main(["moments", "--config", str(cfg)]) == 2


def test_usage_errors(tmp_path, capsys):
    assert main(["moments", "--samples", "10"]) == 2
    assert main(["moments", "--scheme", "8psk"] + SMALL) == 2
    assert main(["figure", "fig99"] + SMALL) == 2
    bad = str(tmp_path / "missing" / "x.csv")
    assert main(["capacity", "--out", bad] + SMALL) == 2
    assert bad in capsys.readouterr().err


def test_gamma_product_command(capsys):
    assert main(["gamma-product", "--k", "1", "--theta", "1", "--copies", "2", "--points", "5"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[0] == "z,pdf"
    assert len(lines) == 6


def test_blocklength_command(capsys):
    assert main(["blocklength", "--preset", "fig1-bpsk", "--eta", "0.7"] + SMALL) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[0] == "scheme,eta,I,U,n_required,n_threshold"


def test_figure_command(capsys):
    assert main(["figure", "fig1", "--n-min", "100", "--n-max", "200", "--n-step", "100"] + SMALL) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[0] == "scheme,n,ach_rate,ach_refined,conv_rate,capacity,I,U"
    assert {l.split(",")[0] for l in lines[1:]} == {"bpsk", "qpsk"}


def test_selftest_passes():
    assert main(["selftest"]) == 0


def test_selftest_detects_broken_quantile(monkeypatch):
    # a corrupted Q^-1 inside the bounds must trip the sandwich check
    monkeypatch.setattr(bounds, "q_inv", lambda p: q_inv(p) + 1e4 * p)
    results = selftest.run_selftest(out=lambda s: None)
    failed = {r.name for r in results if not r.passed}
    assert any("sandwich" in name for name in failed)
    assert main(["selftest"]) == 1
