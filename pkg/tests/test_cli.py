import json

import pytest

from tscl.cli import main


def tiny_config(tmp_path, **over):
    raw = {"data": {"count": 10, "size": 16}, "msssim_scales": 2, "epochs": 4, "save_checkpoints": False,
           "output_dir": str(tmp_path / "run")}
    raw.update(over)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(raw))
    return p


def test_synth(tmp_path, capsys):
    assert main(["synth", "--seed", "2", "--count", "10", "--size", "16", "--out", str(tmp_path / "c")]) == 0
    assert len(list((tmp_path / "c" / "test").glob("*.ppm"))) == 2
    assert "sha256=" in capsys.readouterr().out


def test_schedule_dump(tmp_path, capsys):
    cfg = tiny_config(tmp_path)
    svg = tmp_path / "s.svg"
    assert main(["schedule-dump", "--config", str(cfg), "--epochs", "12", "--svg", str(svg)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "epoch,w_encode,w_decode,w_steg" and len(lines) == 13
    assert svg.read_text().count("<polyline") == 3


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"epochs": 40, "nonsense": 1}))
    assert main(["train", "--config", str(p)]) == 2
    assert "nonsense" in capsys.readouterr().err
    assert main(["schedule-dump", "--config", str(tmp_path / "missing.json")]) == 2


def test_print_config(tmp_path, capsys):
    assert main(["train", "--config", str(tiny_config(tmp_path)), "--seed", "7", "--print-config"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["seed"] == 7 and out["msssim_scales"] == 2


def test_train_and_compare(tmp_path, capsys, monkeypatch):
    cfg = tiny_config(tmp_path)
    monkeypatch.setenv("TSCL_OUT", str(tmp_path / "env"))
    assert main(["train", "--config", str(cfg), "--mode", "fixed-baseline"]) == 0
    log = tmp_path / "env" / "log.csv"
    assert log.exists()
    assert main(["compare", str(log), str(log), "--csv", str(tmp_path / "cmp.csv")]) == 0
    assert "+0.0000" in capsys.readouterr().out
    assert (tmp_path / "cmp.csv").exists()


def test_grad_check_subset(capsys):
    assert main(["grad-check", "--ops", "conv2d", "sigmoid", "--seeds", "2"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2
    assert main(["grad-check", "--ops", "conv2d", "--seeds", "1", "--tol", "1e-12"]) == 3


def test_unknown_op(capsys):
    assert main(["grad-check", "--ops", "fft"]) == 2


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
