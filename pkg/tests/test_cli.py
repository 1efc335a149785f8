import json

import pytest

from balmix.cli import main
from balmix.data import load_csv

TINY = {
    "data": {"generator": {"K": 3, "dim": 2, "n_max": 50, "imbalance_ratio": 5.0,
                           "noise_sigma": 0.5, "seed": 1}},
    "methods": ["instance_sampling", "balanced_mixup"],
    "alphas": [0.1],
    "seeds": [0, 1],
    "epochs": 1,
    "hidden": 4,
    "n_bootstrap": 10,
}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(TINY))
    return path


def test_gen_data(tmp_path):
    assert main(["gen-data", "--K", "3", "--n-max", "40", "--ratio", "4", "--out", str(tmp_path / "new" / "d.csv")]) == 0
    assert load_csv(tmp_path / "new" / "d.csv").class_counts.tolist() == [40, 20, 10]


def test_train(tmp_path, config, capsys):
    assert main(["train", "--config", str(config), "--method", "balanced_mixup", "--alpha", "0.2",
                 "--out", str(tmp_path / "out")]) == 0
    record = json.loads(open(capsys.readouterr().out.strip()).read())
    assert record["method"] == "balanced_mixup" and record["alpha"] == 0.2


def test_sweep_and_summarize(tmp_path, config, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "balanced_mixup" in text and "<-" in text
    first = (out / "summary.csv").read_bytes()
    assert len(list(out.glob("runs/*/record.json"))) == 4
    assert main(["summarize", "--runs", str(out), "--group-by", "method"]) == 0
    assert "instance_sampling" in capsys.readouterr().out
    assert (out / "summary.csv").read_bytes() != first


def test_cv(tmp_path, config):
    assert main(["cv", "--config", str(config), "--folds", "3", "--seed", "5", "--out", str(tmp_path)]) == 0
    records = [json.loads(p.read_text()) for p in tmp_path.glob("runs/*/record.json")]
    assert len(records) == 6
    assert {r["fold"] for r in records} == {0, 1, 2} and {r["seed"] for r in records} == {5}


def test_beta_pdf(tmp_path, capsys):
    assert main(["beta-pdf", "--alpha", "0.2", "--points", "100"]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("0.01,7.96")
    assert main(["beta-pdf", "--alpha", "0.3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "beta_pdf_alpha0.3.csv").exists()


def test_class_hist(tmp_path, config, capsys):
    assert main(["class-hist", "--config", str(config)]) == 0
    assert capsys.readouterr().out.splitlines() == ["class,count", "0,50", "1,22", "2,10"]


@pytest.mark.parametrize("argv", [
    ["sweep", "--config", "/nonexistent/cfg.json"],
    ["beta-pdf", "--alpha", "-1"],
    ["class-hist", "--data", "/nonexistent.csv"],
    ["summarize", "--runs", "/nonexistent"],
])
def test_errors_exit_with_status_2(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({**TINY, "learning_rate": 0.1}))
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "learning_rate" in capsys.readouterr().err


def test_bad_usage_exits_via_argparse():
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--bogus"])
    assert exc.value.code == 2
