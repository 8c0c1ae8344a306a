import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from cuedetect.cli import run_cli
from cuedetect.synthetic import moving_square

from conftest import write_frames, write_video


def tree_digest(root):
    h = hashlib.sha256()
    for path in sorted(root.rglob("bin*.png")):
        h.update(path.relative_to(root).as_posix().encode())
        h.update(path.read_bytes())
    return h.hexdigest()


@pytest.fixture
def small_video(tmp_path):
    frames, gts = moving_square(n_frames=40, width=40, height=32, size=8, noise=2.0)
    return write_video(tmp_path / "data" / "baseline" / "sq", frames, gts, roi=(10, 40))


def test_detect_three_frames(tmp_path):
    frames, _ = moving_square(n_frames=3, width=32, height=24, size=6)
    write_frames(tmp_path / "in", frames)
    assert run_cli(["detect", "--input", str(tmp_path / "in"), "--output", str(tmp_path / "out")]) == 0
    assert sorted(p.name for p in (tmp_path / "out").glob("bin*.png")) == [
        "bin000001.png", "bin000002.png", "bin000003.png"]


def test_detect_with_diagnostics_and_gt(small_video, tmp_path):
    out = tmp_path / "det"
    code = run_cli(["detect", "--input", str(small_video), "--output", str(out), "--gt", str(small_video),
                    "--seed", "3", "--deterministic", "--dump-diagnostics"])
    assert code == 0
    records = [json.loads(line) for line in (out / "diagnostics.jsonl").read_text().splitlines()]
    assert len(records) == 40
    assert {"frame", "timings", "bp_iterations", "reinit", "disp"} <= set(records[0])
    assert (out / "metrics.csv").exists() and (out / "fmeasure.png").exists() and (out / "timings.png").exists()
    assert "seed = 3" in (out / "config_used.txt").read_text()


def test_detect_same_seed_identical_trees(small_video, tmp_path):
    for name in ("a", "b"):
        assert run_cli(["detect", "--input", str(small_video), "--output", str(tmp_path / name), "--seed", "7"]) == 0
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_eval_writes_metrics(small_video, tmp_path, capsys):
    run_cli(["detect", "--input", str(small_video), "--output", str(tmp_path / "m")])
    assert run_cli(["eval", "--input", str(tmp_path / "m"), "--gt", str(small_video),
                    "--output", str(tmp_path / "ev")]) == 0
    rows = list(csv.reader(open(tmp_path / "ev" / "metrics.csv")))
    assert rows[0][1:] == ["Recall", "Specificity", "FPR", "FNR", "PWC", "F-Measure", "Precision", "FPR-S"]
    per_frame = (tmp_path / "ev" / "per_frame.csv").read_text().splitlines()
    assert len(per_frame) == 1 + 31          # temporalROI 10..40 picked up automatically
    assert (tmp_path / "ev" / "metrics.png").exists()
    assert "F-Measure" in capsys.readouterr().out


def test_eval_explicit_roi(small_video, tmp_path):
    run_cli(["detect", "--input", str(small_video), "--output", str(tmp_path / "m")])
    assert run_cli(["eval", "--input", str(tmp_path / "m"), "--gt", str(small_video / "groundtruth"),
                    "--roi", "30:35", "--output", str(tmp_path / "ev")]) == 0
    assert len((tmp_path / "ev" / "per_frame.csv").read_text().splitlines()) == 7


def test_eval_mismatch_fails(small_video, tmp_path, capsys):
    run_cli(["detect", "--input", str(small_video), "--output", str(tmp_path / "m")])
    (tmp_path / "m" / "bin000020.png").unlink()
    code = run_cli(["eval", "--input", str(tmp_path / "m"), "--gt", str(small_video), "--output", str(tmp_path / "ev")])
    assert code != 0
    err = capsys.readouterr().err
    assert "mismatch" in err and "bin000020.png" in err


def test_eval_count_mismatch_without_roi(tmp_path, capsys):
    write_frames(tmp_path / "masks", [np.zeros((4, 4))] * 3, prefix="bin")
    write_frames(tmp_path / "gt", [np.zeros((4, 4))] * 5, prefix="gt")
    code = run_cli(["eval", "--input", str(tmp_path / "masks"), "--gt", str(tmp_path / "gt"), "--output", str(tmp_path / "ev")])
    assert code == 1
    assert "5 ground-truth frames, 3 matching masks" in capsys.readouterr().err


def test_run_cdnet_report(small_video, tmp_path):
    root = small_video.parent.parent
    out = tmp_path / "res"
    assert run_cli(["run-cdnet", "--input", str(root), "--output", str(out), "--ablation"]) == 0
    names = [row[0] for row in csv.reader(open(out / "report.csv"))]
    assert names == ["Name", "baseline/sq", "baseline", "Overall"]
    assert len(list((out / "results" / "baseline" / "sq").glob("bin*.png"))) == 40
    assert (out / "report.txt").exists() and (out / "report_categories.png").exists()
    ablation = [row[0] for row in csv.reader(open(out / "ablation.csv"))][1:]
    assert ablation == [f"baseline/sq:{s}" for s in ("likelihood", "posterior", "pixel_mrf", "two_layer_mrf", "final")]


def test_run_cdnet_filters_and_empty_root(small_video, tmp_path, capsys):
    root = small_video.parent.parent
    assert run_cli(["run-cdnet", "--input", str(root), "--output", str(tmp_path / "r"), "--category", "nope"]) == 1
    assert "no <category>/<video>/input" in capsys.readouterr().err


@pytest.mark.parametrize("argv,code,needle", [
    (["detect", "--input", "/nonexistent", "--output", "x"], 1, "not found"),
    (["frobnicate"], 2, "invalid choice"),
    (["detect", "--output", "x"], 2, "--input"),
])
def test_error_exits(argv, code, needle, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run_cli(argv) == code
    assert needle in capsys.readouterr().err


def test_malformed_config(tmp_path, capsys):
    write_frames(tmp_path / "in", [np.zeros((8, 8, 3))])
    (tmp_path / "bad.cfg").write_text("xi = lots\n")
    code = run_cli(["detect", "--input", str(tmp_path / "in"), "--output", str(tmp_path / "o"),
                    "--config", str(tmp_path / "bad.cfg")])
    assert code == 1 and "xi" in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cuedetect.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "run-cdnet" in proc.stdout
