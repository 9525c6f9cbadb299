import json
import subprocess
import sys

import pytest

from ntklens.cli import main, parse_config_file


def run_cli(args):
    return main(args)


def test_presets_list(capsys):
    assert run_cli(["presets", "list"]) == 0
    out = capsys.readouterr().out
    assert "fuel" in out and "mnist" in out


def test_presets_list_console_script():
    proc = subprocess.run([sys.executable, "-m", "ntklens.cli", "presets", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "fuel" in proc.stdout


def test_ntk_deterministic_outputs(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["ntk", "--preset", "synth-linear", "--subset-size", "12", "--seed", "7"]
    assert run_cli(args + ["--out", str(a)]) == 0
    assert run_cli(args + ["--out", str(b)]) == 0
    assert (a / "spectrum.json").read_bytes() == (b / "spectrum.json").read_bytes()
    assert (a / "ntk_matrix.csv").read_bytes() == (b / "ntk_matrix.csv").read_bytes()
    meta = json.loads((a / "run_meta.json").read_text())
    assert meta["config"]["subset_size"] == 12


def test_select_writes_json(tmp_path):
    out = tmp_path / "sel"
    code = run_cli(["select", "--preset", "clusters", "--method", "rnd", "--size", "4",
                    "--seed", "3", "--retrain-epochs", "20", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "selection.json").read_text())
    assert payload["method"] == "rnd"
    assert len(payload["chosen_indices"]) == 4


def test_select_size_too_large_fails(tmp_path, capsys):
    code = run_cli(["select", "--preset", "clusters", "--method", "rnd", "--size", "99999",
                    "--out", str(tmp_path / "x")])
    assert code != 0
    assert "error" in capsys.readouterr().err


def test_select_bad_method_fails(tmp_path, capsys):
    code = run_cli(["select", "--preset", "clusters", "--method", "greedy",
                    "--out", str(tmp_path / "x")])
    assert code != 0


def test_train_smoke(tmp_path):
    out = tmp_path / "train"
    code = run_cli(["train", "--preset", "synth-linear", "--size", "40", "--epochs", "30",
                    "--seed", "2", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "train_outcome.json").read_text())
    assert payload["min_test_loss"] <= payload["final_test_loss"] + 1e-12
    assert not payload["diverged"]


def test_exp_correlation_smoke(tmp_path):
    out = tmp_path / "corr"
    code = run_cli(["exp-correlation", "--preset", "synth-linear", "--runs", "5",
                    "--size-min", "10", "--size-max", "40", "--epochs", "30",
                    "--master-seed", "1", "--out", str(out)])
    assert code == 0
    lines = (out / "records.csv").read_text().splitlines()
    assert len(lines) == 6
    payload = json.loads((out / "correlation.json").read_text())
    assert payload["n_runs"] == 5


def test_exp_rnd_compare_smoke(tmp_path):
    out = tmp_path / "cmp"
    code = run_cli(["exp-rnd-compare", "--preset", "clusters", "--sizes", "3,5",
                    "--ensemble", "2", "--epochs", "30", "--retrain-epochs", "20",
                    "--out", str(out)])
    assert code == 0
    lines = (out / "comparison.csv").read_text().splitlines()
    assert len(lines) == 5  # header + 2 sizes x 2 methods
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["config"]["ensemble"] == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample config\npreset=synth-linear\nruns=4\nsize_min=10\nsize_max=30\nepochs=25\n")
    out = tmp_path / "corr"
    code = run_cli(["exp-correlation", "--config", str(cfg), "--runs", "3", "--out", str(out)])
    assert code == 0
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["config"]["runs"] == 3  # flag wins
    assert meta["config"]["size_max"] == 30  # file value used


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("presett=fuel\n")
    code = run_cli(["exp-correlation", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert code != 0
    assert "unknown config keys" in capsys.readouterr().err


def test_parse_config_file_rejects_garbage(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a key value line\n")
    with pytest.raises(ValueError):
        parse_config_file(cfg)
