import csv
import json
import subprocess
import sys

import pytest

from crpsdesign.cli import main, read_config, build_config, config_echo
from crpsdesign.experiment import save_dataset
from crpsdesign.metrics import METRICS
from conftest import toy_dataset


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "toy.csv"
    save_dataset(toy_dataset(n=60), p)
    return p


@pytest.fixture(scope="module")
def synth_file(tmp_path_factory, data_file):
    p = tmp_path_factory.mktemp("data") / "synth.csv"
    assert main(["synthesize", "--data", str(data_file), "--seed", "3", "--out", str(p)]) == 0
    return p


def small_config(tmp_path, extra=""):
    p = tmp_path / "cfg.txt"
    p.write_text("n_init=10\nn_add=2\nm_validation=20\n" + extra)
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_synthesize_is_byte_identical(tmp_path, data_file, synth_file):
    again = tmp_path / "again.csv"
    assert main(["synthesize", "--data", str(data_file), "--seed", "3", "--out", str(again)]) == 0
    assert again.read_bytes() == synth_file.read_bytes()
    header = synth_file.read_text().splitlines()[1]
    assert header == "id,response,fp_hex,truth,noise_var"


def test_synthesize_missing_file(tmp_path, capsys):
    assert main(["synthesize", "--data", str(tmp_path / "none.csv"), "--seed", "1", "--out", str(tmp_path / "o")]) != 0
    assert "error" in capsys.readouterr().err


def test_synthesize_requires_seed(tmp_path, data_file):
    with pytest.raises(SystemExit) as exc:
        main(["synthesize", "--data", str(data_file), "--out", str(tmp_path / "o.csv")])
    assert exc.value.code != 0


def test_run_outputs(tmp_path, synth_file):
    cfg = small_config(tmp_path, "n_add=0\n")
    out = tmp_path / "run"
    argv = ["run", "--data", str(synth_file), "--config", str(cfg), "--criterion", "random",
            "--reps", "2", "--out", str(out)]
    assert main(argv) == 0
    steps = read_rows(out / "steps.csv")
    assert steps[0] == ["rep", "step", "criterion", "metric", "value"]
    assert len(steps) - 1 == 2 * len(METRICS)
    summary = read_rows(out / "summary.csv")
    assert len(summary) - 1 == len(METRICS)
    assert all(len(r) == len(summary[0]) for r in summary)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["failures"] == 0 and len(manifest["dataset"]["sha256"]) == 64
    # rerun: identical CSVs
    out2 = tmp_path / "run2"
    argv[-1] = str(out2)
    assert main(argv) == 0
    for name in ("steps.csv", "summary.csv", "config_echo.txt"):
        assert (out / name).read_bytes() == (out2 / name).read_bytes()


def test_config_echo_round_trips(tmp_path, synth_file):
    cfg = small_config(tmp_path, "criterion=sur_timse\nseed=5\nsigma_gamma=12.5\n")
    out = tmp_path / "run"
    assert main(["run", "--data", str(synth_file), "--config", str(cfg), "--out", str(out)]) == 0
    original = build_config(read_config(cfg))
    echoed = build_config(read_config(out / "config_echo.txt"))
    assert echoed == original
    assert config_echo(echoed) == config_echo(original)


def test_run_unknown_criterion(tmp_path, synth_file, capsys):
    code = main(["run", "--data", str(synth_file), "--criterion", "ucb", "--out", str(tmp_path / "r")])
    assert code != 0
    err = capsys.readouterr().err
    assert "pw_twcrps_g1" in err and "sur_ibv" in err


def test_run_invalid_config_key(tmp_path, synth_file, capsys):
    cfg = small_config(tmp_path, "n_steps=4\n")
    assert main(["run", "--data", str(synth_file), "--config", str(cfg), "--out", str(tmp_path / "r")]) != 0
    assert "n_steps" in capsys.readouterr().err


def test_run_failures_give_nonzero_exit(tmp_path, data_file):
    cfg = small_config(tmp_path, "fit_noise=false\n")
    out = tmp_path / "r"
    assert main(["run", "--data", str(data_file), "--config", str(cfg), "--reps", "2", "--out", str(out)]) == 1
    assert json.loads((out / "manifest.json").read_text())["failures"] == 2


def test_sweep(tmp_path, synth_file, caplog):
    cfg = small_config(tmp_path, "n_add=1\n")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--data", str(synth_file), "--config", str(cfg), "--reps", "1",
                 "--sigma-list", "4", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert {r[0] for r in rows[1:]} == {"4.0"}
    assert len(rows) - 1 == 2 * len(METRICS)
    assert main(["sweep", "--data", str(synth_file), "--config", str(cfg), "--reps", "1",
                 "--sigma-list", "4,4", "--out", str(out)]) == 0
    assert "duplicate" in caplog.text
    assert len(read_rows(out)) - 1 == 2 * len(METRICS)


def test_sweep_parse_errors(tmp_path, synth_file):
    for bad in ("4,abc", ""):
        with pytest.raises(SystemExit):
            main(["sweep", "--data", str(synth_file), "--sigma-list", bad, "--out", str(tmp_path / "s")])


def test_kernel_table(tmp_path, data_file):
    out = tmp_path / "k.csv"
    assert main(["kernel-table", "--data", str(data_file), "--fractions", "0.1,0.2,0.3",
                 "--splits", "1", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0][0] == "metric" and [r[0] for r in rows[1:]] == ["RMSE", "CRPS"]
    cells = [float(v) for r in rows[1:] for v in r[1:]]
    assert len(cells) == 18 and all(c > 0 for c in cells)
    assert rows[0][1:4] == ["tanimoto@0.1", "exponential@0.1", "gaussian@0.1"]


def test_kernel_table_bad_fraction(tmp_path, data_file, capsys):
    assert main(["kernel-table", "--data", str(data_file), "--fractions", "1.1", "--out", str(tmp_path / "k")]) != 0
    assert "1.1" in capsys.readouterr().err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "crpsdesign.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("synthesize", "run", "sweep", "kernel-table"):
        assert cmd in res.stdout
