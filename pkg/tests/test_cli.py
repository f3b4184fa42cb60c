import csv

import pytest

from houli.cli import main
from houli.config import ConfigError, build_config, parse_config_text


def test_config_file_and_overrides():
    vals = parse_config_text("# comment\na = 0.9\nM = 64  # trailing\n")
    cfg = build_config("rescale", vals, {"M": "32"})
    assert cfg.a == 0.9 and cfg.M == 32 and cfg.tol_J == 1e-10


def test_unknown_key_is_error():
    with pytest.raises(ConfigError, match="bogus"):
        build_config("rescale", {"bogus": "1"})


def test_malformed_line():
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")


def test_exit_code_for_bad_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("a = 0.95\nfrobnicate = 3\n")
    assert main(["rescale", "--config", str(cfg)]) == 2
    assert "frobnicate" in capsys.readouterr().err


def test_exit_code_for_bad_value(capsys):
    assert main(["certify", "--N", "many"]) == 2


def test_simulate_flat_trace(tmp_path):
    out = tmp_path / "sim.csv"
    svg = tmp_path / "sim.svg"
    assert main(["simulate", "--M", "32", "--t_end", "0.5", "--out", str(out), "--svg", str(svg)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert all(float(r["sup_omega"]) == pytest.approx(1.0, abs=1e-12) for r in rows)
    assert svg.read_text().startswith("<svg")


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--M", "32", "--a", "0.9", "--t_end", "0.3"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_rescale_a_one(tmp_path, capsys):
    assert main(["rescale", "--a", "1", "--M", "32", "--out_dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "verdict = converged" in out and "no blowup at a=1" in out
    assert "c_u_inf = 0\n" in out


def test_rescale_max_steps_exit_zero(tmp_path, capsys):
    assert main(["rescale", "--M", "16", "--dtau", "8e-3", "--max_tau", "0.5", "--out_dir", str(tmp_path)]) == 0
    assert "verdict = max-steps" in capsys.readouterr().out
    assert list(tmp_path.glob("profile-*.txt")) and list(tmp_path.glob("history-*.csv"))


def test_certify_small_and_tampered(tmp_path, capsys):
    assert main(["certify", "--N", "20", "--out_dir", str(tmp_path)]) == 0
    assert (tmp_path / "certificate-20.txt").exists()
    assert main(["certify", "--N", "20", "--tamper", "true", "--out_dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "SHA-256 mismatch" in out


def test_identities_default_and_mutations(capsys):
    assert main(["identities"]) == 0
    assert "16/16 passed" in capsys.readouterr().out
    main(["identities", "--inject_sign_error", "true"])
    out = capsys.readouterr().out
    assert "dE1_oracle" in out.split("failed:")[1]
    main(["identities", "--tol", "1e-15"])
    failed = capsys.readouterr().out.split("failed:")[1]
    assert "tail_basel_sum" in failed and "tail_psi_x0_series" in failed


def test_sweep_file_naming(tmp_path):
    args = ["sweep", "--axis", "a", "--values", "0.95", "--M", "16", "--dtau", "8e-3", "--max_tau", "0.5", "--out_dir", str(tmp_path)]
    assert main(args) == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert len(files) == 2 and files[0].startswith("sweep-a-") and files[0].endswith(".csv")
    first = (tmp_path / files[0]).read_bytes()
    assert main(args) == 0
    assert (tmp_path / files[0]).read_bytes() == first


def test_sweep_bad_axis():
    assert main(["sweep", "--axis", "q"]) == 2
