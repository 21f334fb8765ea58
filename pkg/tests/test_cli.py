from __future__ import annotations

import json
from pathlib import Path

import pytest

from durmlab.cli import main, parse_range
from durmlab.manifest import read_csv

FAST = ["--epochs", "5", "--per-class", "40", "--batch-size", "16"]


def _run_dir(out: Path) -> Path:
    (d,) = [p for p in out.iterdir() if p.is_dir()]
    return d


def test_train_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "runs"
    assert main(["train", *FAST, "--dummy", "2", "--seed", "7", "--out", str(out), "--trials", "3"]) == 0
    printed = capsys.readouterr().out
    assert "mode=DuRM" in printed
    assert "dummy_predictions train=0 test=0" in printed
    run = _run_dir(out)
    names = {p.name for p in run.iterdir()}
    assert names == {
        "manifest.json", "result.json", "trace.json", "flatness.json",
        "epochs.csv", "trace.csv", "checkpoint_final.json", "checkpoint_best.json",
    }
    digest = json.loads((run / "manifest.json").read_text())["digest"]
    assert run.name == digest[:12]
    for name in ("result.json", "trace.json", "flatness.json"):
        assert json.loads((run / name).read_text())["manifest_digest"] == digest
    assert (run / "epochs.csv").read_text().startswith(f"# manifest_digest={digest}")
    assert json.loads((run / "checkpoint_final.json").read_text())["manifest_digest"] == digest
    assert len(read_csv(run / "epochs.csv")) == 5


def test_train_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["train", *FAST, "--out", str(out), "--no-flatness"]) == 0
    ra, rb = _run_dir(a), _run_dir(b)
    assert ra.name == rb.name
    assert (ra / "checkpoint_final.json").read_bytes() == (rb / "checkpoint_final.json").read_bytes()


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DURMLAB_SEED", "5")
    assert main(["train", *FAST, "--out", str(tmp_path), "--no-flatness"]) == 0
    manifest = json.loads((_run_dir(tmp_path) / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 5


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dummy": 3, "epochs": 4, "per_class": 30, "hidden": [8]}))
    assert main(["train", "--config", str(cfg), "--epochs", "2", "--out", str(tmp_path / "o"), "--no-flatness"]) == 0
    manifest = json.loads((_run_dir(tmp_path / "o") / "manifest.json").read_text())
    assert manifest["config"]["epochs"] == 2
    assert manifest["config"]["head"]["num_dummy"] == 3
    assert manifest["config"]["hidden"] == [8]


@pytest.mark.parametrize(
    "argv, key",
    [
        (["train", "--lr", "-1"], "learning_rate"),
        (["train", "--dummy", "-2"], "dummy"),
        (["train", "--test-fraction", "1.5"], "test_fraction"),
        (["train", "--hidden", "a,b"], "hidden"),
        (["flatness", "--checkpoint", "missing.json"], "missing.json"),
        (["sweep", "--dummy-range", "x"], "dummy range"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, argv, key):
    assert main([*argv, "--out", str(tmp_path)]) == 2
    assert key in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"lerning_rate": 0.1}')
    assert main(["train", "--config", str(cfg)]) == 2
    assert "lerning_rate" in capsys.readouterr().err


def test_bad_flag_exit_2(capsys):
    assert main(["train", "--no-such-flag"]) == 2


def test_divergence_exit_3(tmp_path, capsys):
    assert main(["train", *FAST, "--lr", "1e20", "--out", str(tmp_path), "--no-flatness"]) == 3
    assert "diverged" in capsys.readouterr().err


def test_csv_dataset(tmp_path):
    path = tmp_path / "d.csv"
    rows = ["a,b,label"] + [f"{i % 3 * 4 + i * 0.01},{i * 0.02},c{i % 3}" for i in range(60)]
    path.write_text("\n".join(rows) + "\n")
    argv = ["train", "--dataset", str(path), "--epochs", "3", "--batch-size", "8", "--out", str(tmp_path / "o")]
    assert main([*argv, "--no-flatness"]) == 0


def test_sweep_outputs(tmp_path, capsys):
    argv = ["sweep", *FAST, "--dummy-range", "1..2", "--repeats", "2", "--out", str(tmp_path)]
    assert main(argv) == 0
    (out,) = list(tmp_path.iterdir())
    cells = read_csv(out / "cells.csv")
    assert sorted({int(c["dummy"]) for c in cells}) == [0, 1, 2]
    assert len(cells) == 6
    summary = read_csv(out / "summary.csv")
    assert [int(r["dummy"]) for r in summary] == [0, 1, 2]
    assert "wins" in summary[0]
    assert "DuRM beats ERM in" in capsys.readouterr().out


def test_sweep_baseline_only_has_no_wins_column(tmp_path):
    assert main(["sweep", *FAST, "--dummy-range", "0", "--repeats", "1", "--out", str(tmp_path)]) == 0
    (out,) = list(tmp_path.iterdir())
    assert "wins" not in read_csv(out / "summary.csv")[0]


def test_sweep_parallel_matches_serial(tmp_path):
    base = ["sweep", *FAST, "--dummy-range", "1", "--repeats", "2"]
    assert main([*base, "--out", str(tmp_path / "s")]) == 0
    assert main([*base, "--jobs", "2", "--out", str(tmp_path / "p")]) == 0
    (s,), (p,) = list((tmp_path / "s").iterdir()), list((tmp_path / "p").iterdir())
    assert (s / "cells.csv").read_bytes() == (p / "cells.csv").read_bytes()


def test_parse_range():
    assert parse_range("1..3") == [1, 2, 3]
    assert parse_range("0,2,5..6") == [0, 2, 5, 6]


@pytest.mark.parametrize(
    "argv",
    [
        ["theory", "variance", "--sd", "0.5"],
        ["theory", "order-stats", "--s1", "0.5", "--s2", "1.0", "--mc", "20000"],
        ["theory", "order-stats", "--s1", "1.0", "--s2", "1.0"],
        ["theory", "product", "--mu1", "0.2", "--s1", "0.6"],
    ],
)
def test_theory_commands_pass(argv, capsys):
    assert main(argv) == 0
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_theory_invalid_input(capsys):
    assert main(["theory", "variance", "--alpha", "2"]) == 2


def test_flatness_is_byte_reproducible(tmp_path):
    assert main(["train", *FAST, "--out", str(tmp_path / "r"), "--no-flatness"]) == 0
    ck = _run_dir(tmp_path / "r") / "checkpoint_final.json"
    argv = ["flatness", "--checkpoint", str(ck), *FAST, "--deltas", "0.01,0.1", "--trials", "4", "--iterations", "12"]
    assert main([*argv, "--out", str(tmp_path / "f1")]) == 0
    assert main([*argv, "--out", str(tmp_path / "f2")]) == 0
    for name in ("flatness.csv", "flatness.json"):
        assert (tmp_path / "f1" / name).read_bytes() == (tmp_path / "f2" / name).read_bytes()
    rows = read_csv(tmp_path / "f1" / "flatness.csv")
    assert [float(r["delta"]) for r in rows] == [0.01, 0.1]


def test_flatness_rejects_mismatched_dataset(tmp_path, capsys):
    assert main(["train", *FAST, "--out", str(tmp_path / "r"), "--no-flatness"]) == 0
    ck = _run_dir(tmp_path / "r") / "checkpoint_final.json"
    assert main(["flatness", "--checkpoint", str(ck), "--dim", "3", "--out", str(tmp_path / "f")]) == 2


def test_reference_train_command(tmp_path, capsys):
    argv = ["train", "--dataset", "blobs", "--classes", "3", "--dummy", "2", "--epochs", "200", "--seed", "7"]
    assert main([*argv, "--out", str(tmp_path), "--no-flatness"]) == 0
    out = capsys.readouterr().out
    assert "mode=DuRM" in out and "dummy_predictions train=0 test=0" in out


def test_zero_dummy_marks_erm(tmp_path, capsys):
    assert main(["train", *FAST, "--dummy", "0", "--out", str(tmp_path), "--no-flatness"]) == 0
    assert "mode=ERM" in capsys.readouterr().out
    result = json.loads((_run_dir(tmp_path) / "result.json").read_text())
    assert result["mode"] == "ERM"
    assert result["momentum"] == 0.9 and result["weight_decay"] == 5e-4


def test_sweep_grid_and_win_recount(tmp_path):
    assert main(["sweep", *FAST, "--dummy-range", "1..5", "--repeats", "3", "--out", str(tmp_path)]) == 0
    (out,) = list(tmp_path.iterdir())
    cells = read_csv(out / "cells.csv")
    assert len(cells) == 18
    assert sum(int(c["dummy"]) == 0 for c in cells) == 3
    summary = read_csv(out / "summary.csv")
    assert len(summary) == 6
    base = {c["seed"]: float(c["test_accuracy"]) for c in cells if c["dummy"] == "0"}
    recount = sum(
        1 for c in cells if c["dummy"] != "0" and c["status"] == "ok" and float(c["test_accuracy"]) > base[c["seed"]]
    )
    assert sum(int(r["wins"]) for r in summary if r["dummy"] != "0") == recount
    assert json.loads((out / "summary.json").read_text())["total_wins"] == recount


def test_theory_variance_reference_values(capsys):
    assert main(["theory", "variance", "--alpha", "0.5", "--sn", "1", "--sp", "1", "--sd", "0.3"]) == 0
    out = capsys.readouterr().out
    assert "var_erm 0.5\n" in out and "var_durm 0.59\n" in out and out.strip().endswith("PASS")


def test_sweep_range_limits(capsys):
    assert main(["sweep", "--dummy-range", "0..65"]) == 2
    assert main(["sweep", "--repeats", "0"]) == 2


def test_sweep_records_diverged_cells(tmp_path):
    assert main(["sweep", *FAST, "--lr", "1e20", "--dummy-range", "1", "--repeats", "1", "--out", str(tmp_path)]) == 0
    (out,) = list(tmp_path.iterdir())
    assert {c["status"] for c in read_csv(out / "cells.csv")} == {"diverged"}
